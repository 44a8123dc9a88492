"""Loss-stream generators, best-fixed comparators, run evaluation, and
verification suites (certificate bounds, scalar lemma grids, invariances).

Streams are pure functions of (kind, params, seed) via the package's
counter-based generator, so regeneration is bit-identical and runs can
be reproduced from the summary line alone.
"""
import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .backend import run
from .geometry import Domain, Regularizer, norm_value, scalar_lemma_check
from .learners import (
    CERTIFIED,
    SIMPLEX_ALGOS,
    LearnerConfig,
    bound_value,
    certificate,
    comparator_terms,
    make_learner,
)
from .rng import derive, gaussian, uniform
from .trace import RunTrace

STREAM_KINDS = (
    "iid_uniform",
    "iid_gaussian",
    "scale_jump",
    "tiny_scale",
    "plateau_exp",
    "adversarial_worstcase",
    "replay",
)

# Suite used by certificate verification: open-loop, covers benign,
# scale-shifting, and hostile inputs.
BOUND_SUITE_KINDS = ("iid_uniform", "scale_jump", "adversarial_worstcase")


@dataclass(frozen=True)
class LossStream:
    """Specification of one reproducible loss sequence.

    Only the parameters relevant to `kind` are read; the rest keep their
    defaults.  For replay streams, shape comes from the file and `n`,
    `t`, `seed` are ignored.
    """

    kind: str
    n: int = 1
    t: int = 1000
    seed: int = 0
    lo: float = 0.0
    hi: float = 1.0
    sigma: float = 1.0
    scales: tuple = (1.0, 1e3, 1e-3, 1.0)
    scale: float = 1e-300
    x_star: float = 3.0
    path: str = ""

    def __post_init__(self):
        if self.kind not in STREAM_KINDS:
            raise ValueError(f"unknown stream kind {self.kind!r}")
        if self.kind != "replay":
            if self.t < 1 or self.n < 1:
                raise ValueError("stream needs t >= 1 and n >= 1")
        if self.kind == "iid_uniform" and not self.hi > self.lo:
            raise ValueError("iid_uniform needs hi > lo")
        if self.kind == "iid_gaussian" and not self.sigma > 0:
            raise ValueError("iid_gaussian needs sigma > 0")
        if self.kind == "scale_jump":
            if len(self.scales) == 0 or any(s <= 0 for s in self.scales):
                raise ValueError("scale_jump needs a non-empty positive schedule")
        if self.kind == "tiny_scale" and not self.scale > 0:
            raise ValueError("tiny_scale needs scale > 0")
        if self.kind == "replay" and not self.path:
            raise ValueError("replay needs a file path")


def generate(stream):
    """Materialize the (T, N) loss matrix for an open-loop stream.

    plateau_exp is closed-loop (the loss depends on the prediction), so
    it has no pregenerated matrix; drive it with run_plateau instead.
    """
    kind, T, N, seed = stream.kind, stream.t, stream.n, stream.seed
    if kind == "iid_uniform":
        u = uniform(derive(seed, 1), T * N).reshape(T, N)
        return stream.lo + (stream.hi - stream.lo) * u
    if kind == "iid_gaussian":
        return stream.sigma * gaussian(derive(seed, 1), T * N).reshape(T, N)
    if kind == "scale_jump":
        u = uniform(derive(seed, 1), T * N).reshape(T, N)
        k = len(stream.scales)
        seg = np.minimum((np.arange(T) * k) // T, k - 1)
        row_scale = np.asarray(stream.scales, dtype=float)[seg]
        return (2.0 * u - 1.0) * row_scale[:, None]
    if kind == "tiny_scale":
        # scale >= 1e-300 keeps u*scale normal (or a healthy subnormal),
        # never rounding a positive draw to zero
        u = uniform(derive(seed, 1), T * N).reshape(T, N)
        return u * stream.scale
    if kind == "adversarial_worstcase":
        return _adversarial(stream)
    if kind == "replay":
        return load_replay(stream.path)
    if kind == "plateau_exp":
        raise ValueError(
            "plateau_exp is closed-loop; use run_plateau / evaluate_run"
        )
    raise ValueError(f"unknown stream kind {kind!r}")


def _adversarial(stream):
    """Hostile but reproducible stream: signed losses whose scale swings
    over six decades, with one-hot rows, all-zero rows, and 1000x spikes
    interleaved to stress null updates and scale adaptation."""
    T, N, seed = stream.t, stream.n, stream.seed
    u = uniform(derive(seed, 1), T * N).reshape(T, N)
    kind_draw = uniform(derive(seed, 2), T)
    expo = uniform(derive(seed, 3), T)
    losses = (2.0 * u - 1.0) * (10.0 ** (6.0 * expo - 3.0))[:, None]
    onehot = kind_draw < 0.10
    zero = (kind_draw >= 0.10) & (kind_draw < 0.15)
    spike = (kind_draw >= 0.15) & (kind_draw < 0.20)
    if onehot.any():
        keep = np.argmax(np.abs(losses), axis=1)
        mask = np.zeros_like(losses)
        mask[np.arange(T), keep] = 1.0
        losses = np.where(onehot[:, None], losses * mask, losses)
    losses[zero] = 0.0
    losses[spike] *= 1e3
    return losses


def load_replay(path):
    """Read a replay CSV: header row, then one row of N losses per round."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError("replay file needs a header and at least one round")
    width = len(rows[0])
    data = np.empty((len(rows) - 1, width))
    for i, row in enumerate(rows[1:]):
        if len(row) != width:
            raise ValueError(f"replay row {i + 2} has {len(row)} fields, expected {width}")
        data[i] = [float(v) for v in row]
    if not np.all(np.isfinite(data)):
        raise ValueError("replay file contains non-finite values")
    return data


def losses_to_prices(losses):
    """Map generic losses to valid price relatives, exp(-(l - row min)).

    Each round's best coordinate gets price 1, so the mean price under
    any interior portfolio is positive and log-wealth is well defined.
    """
    losses = np.asarray(losses, dtype=float)
    return np.exp(-(losses - losses.min(axis=1, keepdims=True)))


def plateau_loss(x, x_star=3.0):
    """One-sided plateau: linear ramp left of x_star, exponential right."""
    if x < x_star:
        return x_star - x
    return math.expm1(x - x_star)


def plateau_grad(x, x_star=3.0):
    if x < x_star:
        return -1.0
    if x == x_star:
        return 0.0
    return math.exp(x - x_star)


@dataclass
class ClosedLoopRun:
    trace: RunTrace
    grads: np.ndarray
    values: np.ndarray


def run_plateau(t=1000, q=1.0, x1=-10.0, x_star=3.0, c=1.0):
    """Drive scalar gradient descent on the plateau loss, closed loop."""
    x1v = np.array([float(x1)])
    cfg = LearnerConfig(
        algo="isogd",
        n=1,
        q=float(q),
        c=float(c),
        reg=Regularizer.quadratic(x1v),
        domain=Domain.all_of_space(1),
        x1=x1v,
    )
    learner = make_learner(cfg)
    T = int(t)
    preds = np.empty((T, 1))
    grads = np.empty((T, 1))
    values = np.empty(T)
    rl = np.empty(T)
    de = np.empty(T)
    to = np.empty(T)
    et = np.empty(T)
    nu = np.zeros(T, dtype=bool)
    for i in range(T):
        x_cur = float(learner.x[0])
        values[i] = plateau_loss(x_cur, x_star)
        g = plateau_grad(x_cur, x_star)
        grads[i, 0] = g
        d_prev = learner.state.delta_total
        et[i] = cfg.q / d_prev if d_prev > 0 else math.inf
        out = learner.step(grads[i])
        preds[i, 0] = out.prediction[0]
        rl[i] = out.prediction[0] * g
        de[i] = out.delta
        to[i] = learner.state.delta_total
        nu[i] = out.was_null
    trace = RunTrace(cfg.algo, cfg.q, preds, rl, de, to, et, nu)
    return cfg, ClosedLoopRun(trace, grads, values)


def best_fixed(losses, domain):
    """Best constant point in hindsight for linear losses, closed form."""
    losses = np.asarray(losses, dtype=float)
    total = losses.sum(axis=0)
    if domain.kind == "simplex":
        i = int(np.argmin(total))
        x = np.zeros(domain.n)
        x[i] = 1.0
        return x, float(total[i])
    if domain.kind == "ball":
        nrm = float(np.linalg.norm(total))
        if nrm == 0.0:
            x = domain.center.copy()
        else:
            x = domain.center - domain.radius * total / nrm
        return x, float(np.dot(total, x))
    if domain.kind == "box":
        x = np.where(total > 0, domain.lo, domain.hi)
        return x, float(np.dot(total, x))
    raise ValueError(f"no closed-form comparator for domain {domain.kind!r}")


def best_fixed_scalar(fn, lo, hi, tol=1e-9):
    """Ternary search for the minimizer of a unimodal scalar function."""
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError("need hi > lo")
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if fn(m1) <= fn(m2):
            hi = m2
        else:
            lo = m1
    x = 0.5 * (lo + hi)
    return x, fn(x)


def _simplex_project(v):
    # Euclidean projection onto the probability simplex (sort-based)
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.flatnonzero(u * np.arange(1, v.size + 1) > css)[-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def best_fixed_softbayes(prices, tol=1e-4, max_iter=20000):
    """Best constant-rebalanced portfolio: maximize sum_t ln<x, p_t>.

    Projected gradient ascent with backtracking; stops when the linear
    duality gap max_i g_i - <g, x> (an upper bound on the remaining
    log-wealth suboptimality, by concavity) falls below tol.  Returns
    (x*, cumulative loss) where loss is -log-wealth.
    """
    prices = np.asarray(prices, dtype=float)
    T, N = prices.shape
    x = np.full(N, 1.0 / N)

    def wealth_terms(pt):
        w = prices @ pt
        if np.any(w <= 0):
            return None
        return w

    def value(pt):
        w = wealth_terms(pt)
        return -math.inf if w is None else float(np.sum(np.log(w)))

    f = value(x)
    step = 1.0 / T
    for _ in range(max_iter):
        w = prices @ x
        g = (prices / w[:, None]).sum(axis=0)
        gap = float(np.max(g)) - float(np.dot(g, x))
        if gap <= tol:
            break
        improved = False
        s = step
        for _ in range(60):
            cand = _simplex_project(x + s * g)
            fc = value(cand)
            if fc > f:
                x, f, step, improved = cand, fc, s * 2.0, True
                break
            s *= 0.5
        if not improved:
            break
    return x, -f


def sample_comparators(domain, seed, n_random=10):
    """Deterministic comparator set: extreme points, the center, and
    n_random feasible draws."""
    pts = []
    n = domain.n
    if domain.kind == "simplex":
        pts.extend(np.eye(n))
        pts.append(np.full(n, 1.0 / n))
        e = -np.log(
            np.maximum(uniform(derive(seed, 11), n_random * n), 1e-300)
        ).reshape(n_random, n)
        pts.extend(e / e.sum(axis=1, keepdims=True))
    elif domain.kind == "ball":
        pts.append(domain.center.copy())
        for i in range(n):
            for sgn in (1.0, -1.0):
                v = domain.center.copy()
                v[i] += sgn * domain.radius
                pts.append(v)
        g = gaussian(derive(seed, 12), n_random * n).reshape(n_random, n)
        r = uniform(derive(seed, 13), n_random) ** (1.0 / n)
        nrm = np.maximum(np.linalg.norm(g, axis=1), 1e-300)
        pts.extend(domain.center + domain.radius * g * (r / nrm)[:, None])
    elif domain.kind == "box":
        pts.append(domain.lo.copy())
        pts.append(domain.hi.copy())
        pts.append(0.5 * (domain.lo + domain.hi))
        u = uniform(derive(seed, 14), n_random * n).reshape(n_random, n)
        pts.extend(domain.lo + (domain.hi - domain.lo) * u)
    else:
        pts.append(np.zeros(n))
        pts.extend(gaussian(derive(seed, 15), n_random * n).reshape(n_random, n))
    return [np.asarray(p, dtype=float) for p in pts]


@dataclass
class ExperimentRecord:
    """Everything measured on one finished run."""

    algo: str
    stream: LossStream
    q: float
    c: float
    trace: RunTrace
    losses: np.ndarray
    values: np.ndarray
    comparators: list
    comparator_totals: np.ndarray
    regrets: np.ndarray
    regret: float
    bound: float
    bounds: np.ndarray
    cum_regret: np.ndarray
    wall_time: float

    @property
    def ratio(self):
        if not math.isfinite(self.bound) or self.bound == 0.0:
            return math.nan if self.regret != 0.0 else 0.0
        return self.regret / self.bound


def evaluate_run(
    algo,
    stream,
    comparators=None,
    q=None,
    c=1.0,
    m_pivot="barloss",
    x1=None,
    force_python=False,
):
    """Run one learner over one stream and measure regret against a set
    of fixed comparators plus the learner's own certificate bound.

    Raises ArithmeticError with the 1-based round index if any recorded
    state is non-finite.
    """
    if stream.kind == "plateau_exp":
        return _evaluate_plateau(algo, stream, q=q, c=c, x1=x1)
    losses = generate(stream)
    T, N = losses.shape
    cfg = LearnerConfig.default(algo, N, q=q, c=c, m_pivot=m_pivot, x1=x1)
    feed = losses_to_prices(losses) if algo == "isosoftbayes" else losses
    t0 = time.perf_counter()
    trace = run(cfg, feed, force_python=force_python)
    wall = time.perf_counter() - t0
    bad = trace.check_finite()
    if bad:
        raise ArithmeticError(
            f"non-finite learner state at round {bad} ({algo} on {stream.kind})"
        )
    if comparators is None:
        comparators = sample_comparators(cfg.domain, derive(stream.seed, 0xC0))
    values = np.asarray(trace.round_loss, dtype=float)
    comp_rounds = np.empty((len(comparators), T))
    for j, xs in enumerate(comparators):
        if algo == "isosoftbayes":
            w = feed @ xs
            with np.errstate(divide="ignore"):
                comp_rounds[j] = -np.log(w)
        else:
            comp_rounds[j] = losses @ xs
    comp_totals = comp_rounds.sum(axis=1)
    total = float(values.sum())
    regrets = total - comp_totals
    j_best = int(np.argmax(regrets))
    bounds = np.full(len(comparators), math.nan)
    if algo in CERTIFIED:
        cert = certificate(cfg, trace, feed)
        for j, xs in enumerate(comparators):
            bounds[j] = bound_value(cert, comparator_terms(cfg, xs))
    cum = np.cumsum(values - comp_rounds[j_best])
    return ExperimentRecord(
        algo=algo,
        stream=stream,
        q=cfg.q,
        c=cfg.c,
        trace=trace,
        losses=feed,
        values=values,
        comparators=list(comparators),
        comparator_totals=comp_totals,
        regrets=regrets,
        regret=float(regrets[j_best]),
        bound=float(bounds[j_best]),
        bounds=bounds,
        cum_regret=cum,
        wall_time=wall,
    )


def _evaluate_plateau(algo, stream, q=None, c=1.0, x1=None):
    if algo not in ("isogd", "isomd"):
        raise ValueError("plateau_exp is a scalar gradient stream; use isogd")
    cfg, loop = run_plateau(
        t=stream.t,
        q=1.0 if q is None else q,
        x1=-10.0 if x1 is None else float(np.asarray(x1).ravel()[0]),
        x_star=stream.x_star,
        c=c,
    )
    trace = loop.trace
    bad = trace.check_finite()
    if bad:
        raise ArithmeticError(f"non-finite learner state at round {bad}")
    lo = min(float(cfg.x1[0]), stream.x_star) - 10.0
    hi = max(float(cfg.x1[0]), stream.x_star) + 10.0
    xs, vs = best_fixed_scalar(lambda z: plateau_loss(z, stream.x_star), lo, hi)
    T = len(trace)
    comp_rounds = np.full(T, vs)
    regret = float(loop.values.sum() - comp_rounds.sum())
    cert = certificate(cfg, trace, loop.grads)
    bnd = bound_value(cert, comparator_terms(cfg, np.array([xs])))
    return ExperimentRecord(
        algo=algo,
        stream=stream,
        q=cfg.q,
        c=cfg.c,
        trace=trace,
        losses=loop.grads,
        values=loop.values,
        comparators=[np.array([xs])],
        comparator_totals=np.array([float(comp_rounds.sum())]),
        regrets=np.array([regret]),
        regret=regret,
        bound=float(bnd),
        bounds=np.array([float(bnd)]),
        cum_regret=np.cumsum(loop.values - comp_rounds),
        wall_time=0.0,
    )


# ---------------------------------------------------------------------------
# verification suites


LEMMA_GRIDS = {
    "log_approx": (-1.0 + 1e-6, 1.0 - 1e-6),
    "exp_denom": (-30.0, 3.0 - 1e-6),
    "exp_quadratic": (-30.0, 30.0),
}


def verify_lemmas(points=10_000):
    """Grid-check the three scalar inequalities; returns violations per
    lemma (expected: all empty)."""
    report = {}
    for name, (lo, hi) in LEMMA_GRIDS.items():
        grid = np.linspace(lo, hi, points)
        report[name] = [float(x) for x in grid if not scalar_lemma_check(name, x)]
    return report


def verify_bounds(
    algos=CERTIFIED,
    kinds=BOUND_SUITE_KINDS,
    seeds=range(20),
    ns=(2, 10),
    t=10_000,
    rel_tol=1e-6,
    force_python=False,
):
    """Certificate soundness sweep: measured regret must not exceed the
    theorem bound (plus rel_tol slack) for any comparator on any run.

    Returns (checked_pairs, failures); each failure carries enough to
    reproduce: (algo, kind, n, seed, comparator index, regret, bound).
    """
    checked = 0
    failures = []
    for algo in algos:
        for kind in kinds:
            for n in ns:
                for seed in seeds:
                    stream = LossStream(kind, n=n, t=t, seed=seed)
                    rec = evaluate_run(algo, stream, force_python=force_python)
                    for j in range(len(rec.comparators)):
                        checked += 1
                        slack = rel_tol * abs(rec.bounds[j])
                        if rec.regrets[j] > rec.bounds[j] + slack:
                            failures.append(
                                (algo, kind, n, seed, j,
                                 float(rec.regrets[j]), float(rec.bounds[j]))
                            )
    return checked, failures


SCALE_INVARIANT_ALGOS = ("isohedge", "isoprod", "isomlprod", "isoftrl", "isosoftbayes")
TRANSLATION_INVARIANT_ALGOS = ("isohedge", "isoprod", "isomlprod")


def _max_rel_dev(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def verify_invariance(t=500, n=5, seed=11, factors=(1e-6, 1.0, 1e6)):
    """Prediction-level invariance checks for the simplex learners.

    Scaling all losses (prices for the portfolio learner) by c, or
    adding a per-round constant to every coordinate, must leave the
    prediction sequence unchanged.  Returns a list of
    (check, algo, parameter, deviation, tolerance, ok) tuples.
    """
    stream = LossStream("iid_uniform", n=n, t=t, seed=seed)
    losses = generate(stream)
    results = []
    for algo in SCALE_INVARIANT_ALGOS:
        cfg = LearnerConfig.default(algo, n)
        feed = losses_to_prices(losses) if algo == "isosoftbayes" else losses
        base = run(cfg, feed).predictions
        for cfac in factors:
            scaled = run(cfg, cfac * feed).predictions
            dev = _max_rel_dev(scaled, base)
            results.append(("scale", algo, cfac, dev, 1e-6, dev <= 1e-6))
    shifts = gaussian(derive(seed, 21), t)
    for algo in TRANSLATION_INVARIANT_ALGOS:
        cfg = LearnerConfig.default(algo, n)
        base = run(cfg, losses).predictions
        moved = run(cfg, losses + shifts[:, None]).predictions
        dev = _max_rel_dev(moved, base)
        results.append(("translation", algo, 0.0, dev, 1e-9, dev <= 1e-9))
    return results


def verify_oracles():
    """Hand-traced single-step expectations, frozen from independent
    arithmetic; returns a list of (name, got, want, ok) at 1e-9 absolute."""
    checks = []

    def add(name, got, want):
        checks.append((name, float(got), float(want), abs(got - want) <= 1e-9))

    # scalar gradient descent, q=1, x1=0, gradients 2 then 1
    cfg = LearnerConfig(
        algo="isogd", n=1, q=1.0, c=1.0,
        reg=Regularizer.quadratic(np.zeros(1)),
        domain=Domain.all_of_space(1), x1=np.zeros(1),
    )
    gd = make_learner(cfg)
    out1 = gd.step(np.array([2.0]))
    add("gd delta1", out1.delta, math.sqrt(2.0))
    add("gd null1", 1.0 if out1.was_null else 0.0, 1.0)
    add("gd x2", gd.x[0], 0.0)
    d1 = gd.state.delta_total
    out2 = gd.step(np.array([1.0]))
    add("gd eta1", 1.0 / d1, 0.7071067811865475)
    add("gd delta2", out2.delta, 0.35355339059327373)
    add("gd Delta2", gd.state.delta_total, 1.7677669529663689)
    add("gd x3", gd.x[0], -0.565685424949238)

    # projected descent with the self-confident rate, q=1
    aogd = make_learner(LearnerConfig.default("aogd", 1, q=1.0, domain=Domain.ball(np.zeros(1), 1.0)))
    out = aogd.step(np.array([1.0]))
    add("aogd inv_eta1", aogd.inv_eta, 1.0)
    add("aogd delta1", out.delta, 1.0)
    add("aogd Delta1", aogd.state.delta_total, 1.0)

    # filtered-leader on the simplex, N=2, l1=(1,0)
    ftrl = make_learner(LearnerConfig.default("isoftrl", 2))
    out = ftrl.step(np.array([1.0, 0.0]))
    add("ftrl delta1", out.delta, 0.5887050112577373)
    add("ftrl x2", ftrl.x[0], 0.5)

    # shared-rate multiplicative weights, N=2, l1=(1,0)
    prod = make_learner(LearnerConfig.default("isoprod", 2))
    out = prod.step(np.array([1.0, 0.0]))
    add("prod delta1", out.delta, 0.29435250562886867)
    add("prod x2", prod.x[0], 0.5)

    # per-coordinate multiplicative weights, N=2, l1=(1,0)
    ml = make_learner(LearnerConfig.default("isomlprod", 2))
    out = ml.step(np.array([1.0, 0.0]))
    add("mlprod delta1", out.delta, 0.5)
    add("mlprod x2_raw", ml.x[0], 1.0)
    add("mlprod Delta1", ml.total_vec[0], 0.5)
    add("mlprod w2", ml.prediction[0], 0.5)

    # exponential weights with translated mixability gap, N=2, l1=(1,0)
    hedge = make_learner(LearnerConfig.default("isohedge", 2))
    out = hedge.step(np.array([1.0, 0.0]))
    add("hedge delta1", out.delta, 0.5)
    add("hedge x2", hedge.x[1], 0.5)

    # portfolio mixing, N=2, p1=(2,0)
    sb = make_learner(LearnerConfig.default("isosoftbayes", 2))
    add("softbayes eta0", sb.state.eta, 0.5)
    out = sb.step(np.array([2.0, 0.0]))
    add("softbayes delta1", out.delta, 1.0986122886681098)
    add("softbayes Delta1", sb.state.delta_total, 2.4849066497880004)
    add("softbayes x2_1", sb.x[0], 0.6394714728255648)
    add("softbayes x2_2", sb.x[1], 0.36052852717443507)

    add("plateau grad at 4", plateau_grad(4.0, 3.0), math.e)
    return checks
