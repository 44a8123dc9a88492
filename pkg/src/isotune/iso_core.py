"""Adaptive learning-rate core: the iso operator and isotuning sequences.

The central recurrence is X_t = X_{t-1} + g_t(X_t) for non-increasing,
non-negative g_t.  Each step is a one-dimensional fixed point (closed form
for the reciprocal families, bracketed bisection otherwise), and the final
X_T is within a factor 2 of the best fixed trade-off
min_x [x + sum_t g_t(x)], which `hindsight_bound` evaluates by brute force.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

RESIDUAL_RTOL = 1e-12
GRID_POINTS = 10_000
GRID_RTOL = 1e-4  # documented accuracy of hindsight_bound


@dataclass(frozen=True)
class MonotoneFn:
    """Non-increasing, non-negative function on (lower_bound, +inf).

    Families:
      reciprocal(a):          y -> a / y            lower_bound 0
      scaled_reciprocal(a,b): y -> a / (y + b)      lower_bound -b
      exp_decay():            y -> exp(-y)          lower_bound -inf
      constant(k):            y -> k                lower_bound -inf
    """

    family: str
    a: float = 0.0
    b: float = 0.0

    @staticmethod
    def reciprocal(a):
        if a < 0:
            raise ValueError("reciprocal coefficient must be >= 0")
        return MonotoneFn("reciprocal", a=float(a))

    @staticmethod
    def scaled_reciprocal(a, b):
        if a < 0:
            raise ValueError("scaled_reciprocal coefficient must be >= 0")
        return MonotoneFn("scaled_reciprocal", a=float(a), b=float(b))

    @staticmethod
    def exp_decay():
        return MonotoneFn("exp_decay")

    @staticmethod
    def constant(k):
        if k < 0:
            raise ValueError("constant value must be >= 0")
        return MonotoneFn("constant", a=float(k))

    @property
    def lower_bound(self):
        if self.family == "reciprocal":
            return 0.0
        if self.family == "scaled_reciprocal":
            return -self.b
        return -math.inf

    def __call__(self, y):
        """Evaluate on a scalar or numpy array (inside the domain)."""
        if self.family == "reciprocal":
            return self.a / y
        if self.family == "scaled_reciprocal":
            return self.a / (y + self.b)
        if self.family == "exp_decay":
            return np.exp(-y)
        return self.a if np.isscalar(y) else np.full_like(y, self.a, dtype=float)

    def limit_at(self, y):
        """Right limit at y, +inf where the function blows up."""
        if self.family in ("reciprocal", "scaled_reciprocal"):
            shift = y + self.b if self.family == "scaled_reciprocal" else y
            if shift <= 0.0:
                return math.inf if self.a > 0 else 0.0
            return self.a / shift
        return float(self(y))


@dataclass(frozen=True)
class IsotuningState:
    """Scalar isotuning accumulator Delta_t = Delta_0 + sum_s delta_s."""

    q: float
    delta_total: float = 0.0
    delta0: float = 0.0
    t: int = 0
    max_delta: float = 0.0
    c: float = 1.0
    null_rounds: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("q must be positive")
        if self.c <= 0:
            raise ValueError("null threshold c must be positive")

    @property
    def eta(self):
        """Learning rate q / Delta_t; +inf while nothing has accumulated."""
        return self.q / self.delta_total if self.delta_total > 0 else math.inf


@dataclass
class BoundCertificate:
    """Run facts sufficient to evaluate a regret theorem numerically.

    `sums` holds the algorithm-specific accumulations (documented per
    learner in learners.py); `null_rounds` is the (round, delta) ledger of
    null updates.  Comparator-dependent quantities are supplied at
    evaluation time by bound_value().
    """

    algo: str
    q: float
    delta_total: float
    n_rounds: int
    sums: dict
    null_rounds: list

    def validate(self):
        if not math.isfinite(self.delta_total) or self.delta_total < 0:
            raise ValueError("certificate delta_total must be finite and >= 0")
        for key, val in self.sums.items():
            arr = np.asarray(val, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"certificate field {key} is not finite")
        return self


def iso_solve(g, base, lower=None):
    """Solve X = base + g(X) for non-increasing g; X >= max(lower, base).

    Closed forms for the reciprocal families and constants; otherwise
    bracketed bisection with residual |X - base - g(X)| <= 1e-12*max(1,X).
    Raises ValueError when no crossing exists above `lower`.
    """
    if lower is None:
        lower = g.lower_bound
    lo = max(lower, base)
    if g.limit_at(lo) + base < lo:
        raise ValueError("no fixed point above the lower bound")

    if g.family == "reciprocal":
        x = 0.5 * (base + math.sqrt(base * base + 4.0 * g.a))
    elif g.family == "scaled_reciprocal":
        s = base - g.b
        x = 0.5 * (s + math.sqrt(s * s + 4.0 * (g.a + base * g.b)))
    elif g.family == "constant":
        x = base + g.a
    else:
        hi = base + g.limit_at(lo)
        if not math.isfinite(hi):
            hi = max(lo, base, 1.0)
            while base + g(hi) > hi:
                hi *= 2.0
        x = _bisect_fixed_point(g, base, lo, hi)
    if x < lo:
        x = lo
    return x


def _bisect_fixed_point(g, base, lo, hi, iters=200):
    # h(y) = base + g(y) - y is non-increasing; bisect its sign change.
    # Geometric midpoints first so astronomically wide brackets converge.
    for _ in range(iters):
        if lo > 0 and hi > 4.0 * lo:
            mid = math.sqrt(lo * hi)
        else:
            mid = 0.5 * (lo + hi)
        if base + g(mid) >= mid:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, lo):
            break
    x = 0.5 * (lo + hi)
    if abs(base + g(x) - x) > RESIDUAL_RTOL * max(1.0, abs(x)):
        raise ArithmeticError("fixed-point residual did not converge")
    return x


def iso_point(g, slope):
    """Value slope*s at the crossing of f(y) = slope*y with g(y), y > 0.

    Ties (flat zero g) resolve toward small s, so identically-zero g gives
    0.  The returned value always lies between min(f(x), g(x)) and
    max(f(x), g(x)) for every x > 0.
    """
    if slope <= 0:
        raise ValueError("slope must be positive")
    if g.family == "reciprocal":
        return math.sqrt(slope * g.a)
    if g.family == "constant":
        return g.a
    if g.family == "scaled_reciprocal":
        if g.a == 0.0:
            return 0.0
        y = 0.5 * (-g.b + math.sqrt(g.b * g.b + 4.0 * g.a / slope))
        return slope * y
    lo, hi = 0.0, max(1.0, 1.0 / slope) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) >= slope * mid:
            lo = mid
        else:
            hi = mid
    return slope * 0.5 * (lo + hi)


def isotune_step(state, delta, was_null=False):
    """Accumulate one increment; returns the new state."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    ledger = state.null_rounds + ((state.t + 1, delta),) if was_null else state.null_rounds
    return replace(
        state,
        delta_total=state.delta_total + delta,
        t=state.t + 1,
        max_delta=max(state.max_delta, delta),
        null_rounds=ledger,
    )


def null_trigger(g_hat, state):
    """True iff g_hat(Delta) > c*Delta, i.e. the pending increment would
    overshoot the current accumulation.

    Division-free for the reciprocal families (compares a against
    c*Delta*(Delta+b)), so a zero Delta never divides.  Boundary equality
    does not trigger.
    """
    d = state.delta_total
    c = state.c
    if g_hat.family == "reciprocal":
        return g_hat.a > c * d * d if d > 0 else g_hat.a > 0
    if g_hat.family == "scaled_reciprocal":
        if d + g_hat.b <= 0:
            return g_hat.a > 0
        return g_hat.a > c * d * (d + g_hat.b)
    if d == 0:
        return g_hat.limit_at(0.0) > 0
    return g_hat(d) > c * d


def run_isotuning(gs, delta0=0.0):
    """Iterate X_t = X_{t-1} + g_t(X_t) from X_0 = delta0; returns all X_t."""
    xs = np.empty(len(gs))
    x = delta0
    for i, g in enumerate(gs):
        x = iso_solve(g, x)
        xs[i] = x
    return xs


def _grid_minimum(gs, lo, hi, points):
    x = np.geomspace(lo, hi, points)
    total = x.copy()
    recip_a = 0.0
    const = 0.0
    n_exp = 0
    for g in gs:
        if g.family == "reciprocal":
            recip_a += g.a
        elif g.family == "constant":
            const += g.a
        elif g.family == "exp_decay":
            n_exp += 1
        else:
            total += g(x)
    if recip_a:
        total += recip_a / x
    if const:
        total += const
    if n_exp:
        total += n_exp * np.exp(-x)
    i = int(np.argmin(total))
    return float(total[i]), float(x[i]), float(x[max(i - 1, 0)]), float(x[min(i + 1, points - 1)])


def hindsight_bound(gs, lower=0.0):
    """Brute-force (M*_T, x*_T) = min / argmin of x + sum_t g_t(x).

    Geometric grid of >= 10^4 points refined twice around the argmin;
    relative accuracy about 1e-4.  The search floor is
    max(lower, 1e-9)*(1+1e-9); an empty list gives (max(0, lower),) twice.
    """
    base = max(0.0, lower)
    if not gs:
        return base, base
    lo = max(lower, 1e-9) * (1.0 + 1e-9)
    hi = 10.0 * float(sum(g.limit_at(lo) for g in gs)) + 1.0
    if not math.isfinite(hi):
        raise ValueError("objective is infinite at the search floor")
    hi = max(hi, lo * 2.0)
    best, xstar, blo, bhi = _grid_minimum(gs, lo, hi, GRID_POINTS)
    for _ in range(2):
        best, xstar, blo, bhi = _grid_minimum(gs, max(blo, lo), max(bhi, blo * (1 + 1e-12)), GRID_POINTS)
    return best, xstar


def sqrt_bound(a_list):
    """Two-sided closed form for reciprocal isotuning:
    sqrt(2*sum a) - max a <= X_T <= sqrt(2*sum a).

    The upper bound always holds.  The stated lower bound is guaranteed
    once the running total reaches max a (e.g. whenever a_1 >= 1, since
    every X_t >= 1 from then on); below that regime the increments can
    exceed max a and the guaranteed form subtracts the largest realized
    increment max_t (X_t - X_{t-1}) instead."""
    a = np.asarray(a_list, dtype=float)
    if a.size == 0:
        return 0.0, 0.0
    if np.any(a < 0):
        raise ValueError("coefficients must be >= 0")
    hi = math.sqrt(2.0 * float(a.sum()))
    return hi - float(a.max()), hi


def seqopt_rate(prefix_sum, q):
    """Inverse-rate contribution sqrt(q * prefix_sum) of the one-shot
    hindsight-optimal schedule."""
    if prefix_sum < 0 or q <= 0:
        raise ValueError("need prefix_sum >= 0 and q > 0")
    return math.sqrt(q * prefix_sum)
