"""Scale-free online learners with executable regret certificates.

Every learner exposes step(loss) -> StepOutcome and mutates its own state.
The shared skeleton is: play x_t, observe the loss vector, compute the
increment delta_t of the learning-rate denominator Delta_t = sum delta_s,
and (where the algorithm calls for it) apply the online correction

    x_{t+1} = x_t' * Delta_{t-1}/Delta_t + (delta_t/Delta_t) * x_1

which averages the raw update x_t' with the anchor x_1 so early rounds
cannot run away.  A "null update" freezes x (x_t' = x_t) whenever the
pending increment would exceed everything accumulated so far; its delta is
the crossing value of the pending increment with y -> c*y.

certificate()/bound_value() turn a finished run into a numeric regret
bound; the measured regret of any admissible comparator must stay below
it.
"""
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Domain,
    Regularizer,
    bregman,
    dual_norm_value,
    ftrl_argmin,
    md_argmin,
    norm_value,
    project,
)
from .iso_core import BoundCertificate, IsotuningState, isotune_step

ALGOS = (
    "isogd",
    "aogd",
    "isoftrl",
    "isomd",
    "isoprod",
    "isomlprod",
    "isohedge",
    "isosoftbayes",
    "seqoptgd",
)
# learners whose bound_value() evaluates a proven regret theorem
CERTIFIED = tuple(a for a in ALGOS if a != "seqoptgd")
SIMPLEX_ALGOS = ("isoprod", "isomlprod", "isohedge", "isosoftbayes")


@dataclass
class StepOutcome:
    prediction: np.ndarray  # point played this round
    delta: float  # increment of the rate denominator
    was_null: bool
    bar_loss: float  # incurred loss: <x_t, loss>, or -ln<x_t, p> for portfolios


def _corrected(x_prime, x1, d_prev, delta, d_new):
    if d_new <= 0.0:
        return x_prime
    return x_prime * (d_prev / d_new) + (delta / d_new) * x1


def _default_q(algo, n):
    if algo in SIMPLEX_ALGOS or algo in ("isoftrl", "isomd"):
        return math.log(n) if n > 1 else 1.0
    return 1.0


@dataclass
class LearnerConfig:
    """Resolved construction parameters for one run."""

    algo: str
    n: int
    q: float
    c: float = 1.0
    reg: Regularizer = None
    domain: Domain = None
    x1: np.ndarray = None
    m_pivot: str = "barloss"  # isohedge pivot: "barloss" or "zero"
    eps: float = 1.0  # seqoptgd rate offset

    @staticmethod
    def default(algo, n, q=None, c=1.0, m_pivot="barloss", domain=None, x1=None, eps=1.0):
        if algo not in ALGOS:
            raise ValueError(f"unknown algorithm tag {algo!r}")
        if algo in SIMPLEX_ALGOS and n < 2:
            raise ValueError(f"{algo} needs at least two coordinates")
        if algo in SIMPLEX_ALGOS or (algo in ("isoftrl", "isomd") and domain is None):
            domain = Domain.simplex(n)
            reg = Regularizer.entropic(n)
        elif algo in ("isoftrl", "isomd") and domain.kind == "simplex":
            reg = Regularizer.entropic(n)
        else:
            if domain is None:
                domain = Domain.ball(np.zeros(n), 1.0)
            center = x1 if x1 is not None else _domain_center(domain)
            reg = Regularizer.quadratic(np.asarray(center, dtype=float))
        if algo == "aogd" and q is None:
            d = domain.diameter("l2")
            if not math.isfinite(d):
                raise ValueError("aogd needs a bounded domain (or an explicit q)")
            q = d * d
        if q is None:
            q = _default_q(algo, n)
        if x1 is None:
            x1 = reg.argmin() if reg.kind == "entropic" else _domain_center(domain)
        x1 = np.asarray(x1, dtype=float)
        if not domain.contains(x1):
            raise ValueError("x1 must be feasible")
        return LearnerConfig(algo, n, float(q), float(c), reg, domain, x1, m_pivot, float(eps))


def _domain_center(domain):
    if domain.kind == "ball":
        return domain.center.copy()
    if domain.kind == "box":
        return 0.5 * (domain.lo + domain.hi)
    if domain.kind == "simplex":
        return np.full(domain.n, 1.0 / domain.n)
    return np.zeros(domain.n)


class IsoMD:
    """Mirror descent whose rate denominator grows by q*||l||_*^2/(2*Delta),
    with null updates and the online correction."""

    algo = "isomd"

    def __init__(self, reg, domain, q=None, c=1.0, x1=None):
        if q is None:
            q = _default_q("isomd", domain.n) if reg.kind == "entropic" else 1.0
        self.reg = reg
        self.domain = domain
        self.q = float(q)
        self.x1 = np.asarray(x1, dtype=float) if x1 is not None else (
            reg.argmin() if reg.kind == "entropic" else _domain_center(domain)
        )
        if not domain.contains(self.x1):
            raise ValueError("x1 must be feasible")
        self.x = self.x1.copy()
        self.state = IsotuningState(q=self.q, c=c)

    def step(self, loss):
        loss = np.asarray(loss, dtype=float)
        x_t = self.x.copy()
        bar = float(np.dot(x_t, loss))
        dual = dual_norm_value(loss, self.reg.norm)
        d_prev = self.state.delta_total
        if dual == 0.0:
            self.state = isotune_step(self.state, 0.0)
            return StepOutcome(x_t, 0.0, False, bar)
        was_null = math.sqrt(self.q / 2.0) * dual > d_prev
        if was_null:
            x_prime = x_t
            delta = math.sqrt(self.q / 2.0) * dual
        else:
            x_prime = md_argmin(self.reg, self.domain, x_t, loss, d_prev / self.q)
            delta = self.q * dual * dual / (2.0 * d_prev)
        self.state = isotune_step(self.state, delta, was_null)
        self.x = _corrected(x_prime, self.x1, d_prev, delta, self.state.delta_total)
        return StepOutcome(x_t, delta, was_null, bar)


class IsoGD(IsoMD):
    """IsoMD with the quadratic regularizer: gradient descent at rate
    q/Delta with null updates and the online correction."""

    algo = "isogd"

    def __init__(self, domain, q=1.0, c=1.0, x1=None):
        center = np.asarray(x1, dtype=float) if x1 is not None else _domain_center(domain)
        super().__init__(Regularizer.quadratic(center), domain, q=q, c=c, x1=center)


class IsoFTRL:
    """Follow-the-regularized-leader on filtered losses: null rounds grow
    Delta but keep the cumulative loss untouched.  No online correction."""

    algo = "isoftrl"

    def __init__(self, reg, domain, q=None, c=1.0):
        if q is None:
            q = _default_q("isoftrl", domain.n) if reg.kind == "entropic" else 1.0
        self.reg = reg
        self.domain = domain
        self.q = float(q)
        self.cum_loss = np.zeros(domain.n)
        self.state = IsotuningState(q=self.q, c=c)
        self._x = None

    @property
    def x(self):
        if self._x is None:
            self._x = ftrl_argmin(
                self.reg, self.domain, self.cum_loss, self.state.delta_total / self.q
            )
        return self._x

    def step(self, loss):
        loss = np.asarray(loss, dtype=float)
        x_t = self.x.copy()
        bar = float(np.dot(x_t, loss))
        dual = dual_norm_value(loss, self.reg.norm)
        d_prev = self.state.delta_total
        if dual == 0.0:
            self.state = isotune_step(self.state, 0.0)
            return StepOutcome(x_t, 0.0, False, bar)
        was_null = math.sqrt(self.q / 2.0) * dual > d_prev
        if was_null:
            delta = math.sqrt(self.q / 2.0) * dual
        else:
            delta = self.q * dual * dual / (2.0 * d_prev)
            self.cum_loss = self.cum_loss + loss
        self.state = isotune_step(self.state, delta, was_null)
        self._x = None
        return StepOutcome(x_t, delta, was_null, bar)


def psi(a, b):
    """Positive root of u^2 - a*u - b/4 = 0: the next inverse rate."""
    return 0.5 * (a + math.sqrt(a * a + b))


class AOGD:
    """Adaptive online gradient descent: the inverse rate solves
    1/eta_t = psi(1/eta_{t-1} + alpha_t, 4*||g||^2/q), equating the two
    sides of the quadratic regret trade-off each round."""

    algo = "aogd"

    def __init__(self, domain, q=None, x1=None):
        if q is None:
            d = domain.diameter("l2")
            if not math.isfinite(d):
                raise ValueError("aogd needs a bounded domain (or an explicit q)")
            q = d * d
        self.domain = domain
        self.q = float(q)
        self.x1 = np.asarray(x1, dtype=float) if x1 is not None else _domain_center(domain)
        if not domain.contains(self.x1):
            raise ValueError("x1 must be feasible")
        self.x = self.x1.copy()
        self.inv_eta = 0.0
        self.alpha_sum = 0.0
        self.state = IsotuningState(q=self.q)

    def step(self, grad, alpha=0.0):
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        grad = np.asarray(grad, dtype=float)
        x_t = self.x.copy()
        bar = float(np.dot(x_t, grad))
        gsq = float(np.sum(grad * grad))
        self.inv_eta = psi(self.inv_eta + alpha, 4.0 * gsq / self.q)
        self.alpha_sum += alpha
        if self.inv_eta > 0.0:
            self.x = project(self.domain, x_t - grad / self.inv_eta)
            delta = gsq / self.inv_eta
        else:
            delta = 0.0
        self.state = isotune_step(self.state, delta)
        return StepOutcome(x_t, delta, False, bar)


class IsoProd:
    """Multiplicative weights x_i*(1 + eta*(bar_loss - loss_i)) with a
    single shared rate, null updates, and the online correction."""

    algo = "isoprod"

    def __init__(self, n, q=None, c=1.0):
        self.n = int(n)
        if self.n < 2:
            raise ValueError("need at least two coordinates")
        self.q = float(q) if q is not None else _default_q("isoprod", n)
        self.x1 = np.full(self.n, 1.0 / self.n)
        self.x = self.x1.copy()
        self.state = IsotuningState(q=self.q, c=c)

    def step(self, loss):
        loss = np.asarray(loss, dtype=float)
        x_t = self.x.copy()
        bar = float(np.dot(x_t, loss))
        r = bar - loss
        s = float(np.max(np.abs(r)))
        d_prev = self.state.delta_total
        if s == 0.0:
            self.state = isotune_step(self.state, 0.0)
            return StepOutcome(x_t, 0.0, False, bar)
        was_null = math.sqrt(self.q / 2.0) * s > d_prev - self.q * s
        if was_null:
            x_prime = x_t
            delta = math.sqrt(self.q / 2.0) * s
        else:
            eta = self.q / d_prev
            x_prime = x_t * (1.0 + eta * r)
            delta = max(0.0, float(np.max(r - np.log1p(eta * r) / eta)))
        self.state = isotune_step(self.state, delta, was_null)
        x_new = _corrected(x_prime, self.x1, d_prev, delta, self.state.delta_total)
        # The update conserves sum(x) = 1 only in exact arithmetic; rounding
        # drift compounds multiplicatively, so renormalize every round.
        self.x = x_new / float(np.sum(x_new))
        return StepOutcome(x_t, delta, was_null, bar)


class IsoMLProd:
    """Per-coordinate rates q/Delta_i over non-negative weights started at
    1; prediction weights are proportional to x_i/Delta_i.  A single round
    is null for all coordinates as soon as one pending factor would leave
    [1/2, 3/2]."""

    algo = "isomlprod"

    def __init__(self, n, q=None):
        self.n = int(n)
        if self.n < 2:
            raise ValueError("need at least two coordinates")
        self.q = float(q) if q is not None else _default_q("isomlprod", n)
        self.x = np.ones(self.n)
        self.delta_vec = np.zeros(self.n)
        self.total_vec = np.zeros(self.n)
        self.t = 0
        self.null_rounds = []

    @property
    def prediction(self):
        zero = self.total_vec == 0.0
        if np.any(zero):
            w = zero.astype(float)
        else:
            w = self.x / self.total_vec
        return w / np.sum(w)

    def step(self, loss):
        loss = np.asarray(loss, dtype=float)
        w = self.prediction
        bar = float(np.dot(w, loss))
        r = bar - loss
        s = float(np.max(np.abs(r)))
        self.t += 1
        if s == 0.0:
            self.delta_vec = np.zeros(self.n)
            return StepOutcome(w, 0.0, False, bar)
        was_null = bool(np.any(self.q * np.abs(r) >= 0.5 * self.total_vec))
        d_prev = self.total_vec.copy()
        if was_null:
            x_prime = self.x
            dvec = np.full(self.n, s)
            self.null_rounds.append((self.t, s))
        else:
            active = r != 0.0
            u = np.zeros(self.n)
            u[active] = self.q * r[active] / d_prev[active]
            dvec = np.zeros(self.n)
            dvec[active] = r[active] - np.log1p(u[active]) * d_prev[active] / self.q
            np.maximum(dvec, 0.0, out=dvec)
            x_prime = self.x * (1.0 + u)
        self.total_vec = d_prev + dvec
        pos = self.total_vec > 0.0
        x_new = x_prime.copy()
        x_new[pos] = x_prime[pos] * (d_prev[pos] / self.total_vec[pos]) + dvec[pos] / self.total_vec[pos]
        self.x = x_new
        self.delta_vec = dvec
        return StepOutcome(w, float(np.max(dvec)), was_null, bar)


class IsoHedge:
    """Exponential weights against a per-round pivot m_t (the mixture loss
    by default); delta_t is the translated mixability gap.  Online
    correction, no null updates."""

    algo = "isohedge"

    def __init__(self, n, q=None, m_pivot="barloss"):
        if m_pivot not in ("barloss", "zero"):
            raise ValueError("m_pivot must be 'barloss' or 'zero'")
        self.n = int(n)
        if self.n < 2:
            raise ValueError("need at least two coordinates")
        self.q = float(q) if q is not None else _default_q("isohedge", n)
        self.m_pivot = m_pivot
        self.x1 = np.full(self.n, 1.0 / self.n)
        self.x = self.x1.copy()
        self.state = IsotuningState(q=self.q)
        self.last_m = 0.0

    def step(self, loss, m=None):
        loss = np.asarray(loss, dtype=float)
        x_t = self.x.copy()
        bar = float(np.dot(x_t, loss))
        if m is None:
            m = bar if self.m_pivot == "barloss" else 0.0
        self.last_m = m
        d_prev = self.state.delta_total
        if d_prev == 0.0:
            delta = bar - float(np.min(loss))
            if delta == 0.0:
                x_prime = x_t
            else:
                mask = loss == np.min(loss)
                x_prime = mask / np.sum(mask)
        else:
            eta = self.q / d_prev
            u = eta * (m - loss)
            shift = float(np.max(u))
            e = x_t * np.exp(u - shift)
            z = float(np.sum(e))
            x_prime = e / z
            delta = max(0.0, (shift + math.log(z)) / eta + bar - m)
        self.state = isotune_step(self.state, delta)
        self.x = _corrected(x_prime, self.x1, d_prev, delta, self.state.delta_total)
        return StepOutcome(x_t, delta, False, bar)


class IsoSoftBayes:
    """Portfolio mixture x*(1 - eta + eta*p/bar_p) with eta <= 1/2
    enforced by seeding the denominator at 2*ln(n).  Online correction
    keeps every weight positive."""

    algo = "isosoftbayes"

    def __init__(self, n):
        self.n = int(n)
        if self.n < 2:
            raise ValueError("need at least two coordinates")
        self.q = math.log(n)
        self.x1 = np.full(self.n, 1.0 / self.n)
        self.x = self.x1.copy()
        self.state = IsotuningState(q=self.q, delta_total=2.0 * self.q, delta0=2.0 * self.q)

    def step(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < 0):
            raise ValueError("price relatives must be >= 0")
        x_t = self.x.copy()
        bar_p = float(np.dot(x_t, p))
        if bar_p <= 0.0:
            raise ValueError("mixture price must be positive")
        d_prev = self.state.delta_total
        eta = self.q / d_prev
        ratio = p / bar_p
        x_prime = x_t * (1.0 - eta + eta * ratio)
        delta = float(np.max(np.log1p((eta / (1.0 - eta)) * ratio)))
        self.state = isotune_step(self.state, delta)
        self.x = _corrected(x_prime, self.x1, d_prev, delta, self.state.delta_total)
        return StepOutcome(x_t, delta, False, -math.log(bar_p))


class SeqOptGD:
    """Projected gradient descent at the one-shot hindsight rate
    1/eta_t = eps + sqrt(sum_{s<=t} ||g_s||^2).  Baseline: diagnostics
    only, no certificate."""

    algo = "seqoptgd"

    def __init__(self, domain, eps=1.0, x1=None):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.domain = domain
        self.eps = float(eps)
        self.x1 = np.asarray(x1, dtype=float) if x1 is not None else _domain_center(domain)
        self.x = self.x1.copy()
        self.sum_sq = 0.0
        self.state = IsotuningState(q=1.0)

    def step(self, grad):
        grad = np.asarray(grad, dtype=float)
        x_t = self.x.copy()
        bar = float(np.dot(x_t, grad))
        gsq = float(np.sum(grad * grad))
        self.sum_sq += gsq
        inv = self.eps + math.sqrt(self.sum_sq)
        self.x = project(self.domain, x_t - grad / inv)
        delta = gsq / inv
        self.state = isotune_step(self.state, delta)
        return StepOutcome(x_t, delta, False, bar)


def make_learner(cfg):
    a = cfg.algo
    if a == "isogd":
        return IsoGD(cfg.domain, q=cfg.q, c=cfg.c, x1=cfg.x1)
    if a == "isomd":
        return IsoMD(cfg.reg, cfg.domain, q=cfg.q, c=cfg.c, x1=cfg.x1)
    if a == "isoftrl":
        return IsoFTRL(cfg.reg, cfg.domain, q=cfg.q, c=cfg.c)
    if a == "aogd":
        return AOGD(cfg.domain, q=cfg.q, x1=cfg.x1)
    if a == "isoprod":
        return IsoProd(cfg.n, q=cfg.q, c=cfg.c)
    if a == "isomlprod":
        return IsoMLProd(cfg.n, q=cfg.q)
    if a == "isohedge":
        return IsoHedge(cfg.n, q=cfg.q, m_pivot=cfg.m_pivot)
    if a == "isosoftbayes":
        return IsoSoftBayes(cfg.n)
    if a == "seqoptgd":
        return SeqOptGD(cfg.domain, eps=cfg.eps, x1=cfg.x1)
    raise ValueError(f"unknown algorithm tag {a!r}")


# ---------------------------------------------------------------------------
# certificates


def _root_sq_sum(v, weights=None):
    """sqrt of a (weighted) sum of squares, with the squares formed at
    unit scale: values near 1e-300 would otherwise underflow to zero and
    silently drop the dominant term of a bound."""
    v = np.asarray(v, dtype=float)
    m = float(np.max(np.abs(v))) if v.size else 0.0
    if m == 0.0:
        return 0.0
    w = v / m
    sq = w * w if weights is None else weights * w * w
    return m * math.sqrt(float(np.sum(sq)))


def _root_sq_sum_cols(r):
    """Per-column sqrt(sum of squares) of a matrix, squares formed at
    unit scale column by column."""
    m = np.max(np.abs(r), axis=0)
    safe = np.where(m > 0, m, 1.0)
    w = r / safe
    return np.where(m > 0, m * np.sqrt(np.sum(w * w, axis=0)), 0.0)


def certificate(cfg, trace, losses):
    """Extract the run facts each regret theorem needs from a finished run.

    Quadratic accumulations are stored as their square roots (root_*),
    which scale linearly with the losses and so stay representable on
    runs at extreme scales."""
    losses = np.asarray(losses, dtype=float)
    algo = cfg.algo
    sums = {}
    null_rounds = [
        (t + 1, float(trace.delta[t])) for t in np.flatnonzero(trace.was_null)
    ]
    if algo in ("isogd", "isomd", "isoftrl"):
        d = _dual_norms(losses, cfg.reg.norm)
        nn = ~trace.was_null.astype(bool)
        tau = int(np.flatnonzero(trace.was_null)[-1]) + 1 if null_rounds else 0
        sums = {
            "root_dual_sq": _root_sq_sum(d),
            "root_dual_sq_nonnull": _root_sq_sum(d[nn]),
            "max_dual": float(np.max(d)) if d.size else 0.0,
            "dual_at_tau": float(d[tau - 1]) if tau else 0.0,
            "tau": float(tau),
        }
    elif algo == "isoprod":
        r = trace.round_loss[:, None] - losses
        s = np.max(np.abs(r), axis=1)
        sums = {"root_s_sq": _root_sq_sum(s), "big_s": float(np.max(s)) if s.size else 0.0}
    elif algo == "isomlprod":
        r = trace.round_loss[:, None] - losses
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(trace.total_vec > 0, trace.delta_vec / trace.total_vec, 0.0)
        sums = {
            "root_v_vec": _root_sq_sum_cols(r),
            "big_s": float(np.max(np.abs(r))) if r.size else 0.0,
            "c_max": float(np.max(np.sum(ratio, axis=0))),
        }
    elif algo == "isohedge":
        m = trace.m_used
        dev = losses - m[:, None]
        sums = {
            "root_u_total": _root_sq_sum(dev, weights=trace.predictions),
            "big_s": float(np.max(np.abs(trace.round_loss[:, None] - losses))),
            "max_dev": float(np.max(np.abs(dev))),
            "pivot_is_barloss": 1.0 if cfg.m_pivot == "barloss" else 0.0,
        }
    elif algo == "seqoptgd":
        raise ValueError("seqoptgd is a diagnostics-only baseline with no certificate")
    delta_total = float(trace.total_vec[-1].max()) if algo == "isomlprod" else float(trace.Delta[-1])
    return BoundCertificate(
        algo=algo,
        q=cfg.q,
        delta_total=delta_total,
        n_rounds=len(trace.delta),
        sums=sums,
        null_rounds=null_rounds,
    ).validate()


def _dual_norms(losses, primal_norm):
    if primal_norm == "l2":
        return np.sqrt(np.sum(losses * losses, axis=1))
    if primal_norm == "l1":
        return np.max(np.abs(losses), axis=1)
    return np.sum(np.abs(losses), axis=1)


def comparator_terms(cfg, x_star):
    """Comparator-dependent inputs to bound_value for one admissible x*."""
    x_star = np.asarray(x_star, dtype=float)
    terms = {"x_star": x_star}
    if cfg.algo in ("isogd", "isomd"):
        terms["phi1"] = bregman(cfg.reg, x_star, cfg.x1)
        terms["dist_x1"] = norm_value(x_star - cfg.x1, cfg.reg.norm)
        terms["diameter"] = cfg.domain.diameter(cfg.reg.norm)
    elif cfg.algo == "isoftrl":
        terms["phi1"] = cfg.reg.value(x_star)
        terms["diameter"] = cfg.domain.diameter(cfg.reg.norm)
    return terms


def bound_value(cert, terms=None):
    """Numeric regret bound for one comparator.  Every learner's proven
    theorem is evaluated with the exact constants of its statement."""
    a = cert.algo
    q = cert.q
    s = cert.sums
    if a == "aogd":
        return cert.delta_total
    if a == "isosoftbayes":
        return 2.0 * cert.delta_total
    if a == "isoprod":
        return 2.0 * math.sqrt(q) * s["root_s_sq"] + s["big_s"] * (2.0 * q + math.sqrt(2.0 * q) + 2.0)
    if a == "isohedge":
        spread = s["big_s"] if s["pivot_is_barloss"] else s["max_dev"]
        return (
            2.0 * math.sqrt(q) * s["root_u_total"]
            + 2.0 * s["big_s"]
            + (2.0 / 3.0) * spread * q
        )
    if a == "isomlprod":
        per_coord = (s["root_v_vec"] * math.sqrt(q) + s["big_s"] * (2.0 + 3.0 * q)) * (
            2.0 + math.log1p(s["c_max"]) / q
        )
        return float(np.dot(terms["x_star"], per_coord))
    if a in ("isogd", "isomd", "isoftrl"):
        phi1 = terms["phi1"]
        tau = s["tau"]
        root_q = math.sqrt(q)
        main = (root_q + phi1 / root_q) * (
            s["root_dual_sq"] + s["max_dual"] / math.sqrt(2.0)
        )
        if tau == 0:
            return main
        if a == "isoftrl":
            travel = math.sqrt(2.0 * phi1) + 2.0 * math.sqrt(2.0 * q * tau)
        else:
            travel = terms["dist_x1"] + math.sqrt(2.0 * q * tau)
        return main + 2.0 * min(terms["diameter"], travel) * s["dual_at_tau"]
    raise ValueError(f"no certificate for algorithm tag {a!r}")


def generic_bound(cert, phi1, r_at_null):
    """Framework-level bound (1 + phi1/q)*Delta_T + sum over null rounds of
    max(0, r_t - delta_t); valid for the online-correction learners."""
    slack = sum(
        max(0.0, float(r) - d) for (_, d), r in zip(cert.null_rounds, r_at_null)
    )
    return (1.0 + phi1 / cert.q) * cert.delta_total + slack
