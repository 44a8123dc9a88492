"""Norms, regularizers, domains, and the closed-form argmin steps.

Supported (regularizer, domain) pairings:
  quadratic  with all_of_space / ball / box   (losses measured in l2)
  entropic   with simplex                     (losses measured in linf)

Euclidean projection onto the simplex is deliberately not provided; the
entropic updates keep iterates feasible by construction.
"""
import math
from dataclasses import dataclass

import numpy as np

DUAL = {"l1": "linf", "l2": "l2", "linf": "l1"}


def norm_value(x, norm):
    x = np.asarray(x, dtype=float)
    if norm == "l1":
        return float(np.sum(np.abs(x)))
    if norm == "l2":
        return float(np.sqrt(np.sum(x * x)))
    if norm == "linf":
        return float(np.max(np.abs(x))) if x.size else 0.0
    raise ValueError(f"unknown norm {norm!r}")


def dual_norm_value(x, norm):
    return norm_value(x, DUAL[norm])


@dataclass(frozen=True)
class Regularizer:
    """quadratic: 0.5*||x - center||_2^2;  entropic: sum_i x_i ln(n x_i)."""

    kind: str
    center: np.ndarray = None
    n: int = 0

    @staticmethod
    def quadratic(center):
        return Regularizer("quadratic", center=np.asarray(center, dtype=float))

    @staticmethod
    def entropic(n):
        if n < 1:
            raise ValueError("entropic regularizer needs n >= 1")
        return Regularizer("entropic", n=int(n))

    @property
    def norm(self):
        """Norm in which this regularizer is 1-strongly convex."""
        return "l2" if self.kind == "quadratic" else "l1"

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "quadratic":
            d = x - self.center
            return 0.5 * float(np.sum(d * d))
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(x > 0, x * np.log(self.n * np.maximum(x, 1e-320)), 0.0)
        return float(np.sum(terms))

    def argmin(self):
        if self.kind == "quadratic":
            return self.center.copy()
        return np.full(self.n, 1.0 / self.n)


@dataclass(frozen=True)
class Domain:
    kind: str
    n: int
    center: np.ndarray = None
    radius: float = 0.0
    lo: np.ndarray = None
    hi: np.ndarray = None

    @staticmethod
    def all_of_space(n):
        return Domain("all", int(n))

    @staticmethod
    def ball(center, radius):
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ValueError("ball radius must be positive")
        return Domain("ball", center.size, center=center, radius=float(radius))

    @staticmethod
    def box(lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo > hi):
            raise ValueError("box needs lo <= hi elementwise")
        return Domain("box", lo.size, lo=lo, hi=hi)

    @staticmethod
    def simplex(n):
        if n < 1:
            raise ValueError("simplex needs n >= 1")
        return Domain("simplex", int(n))

    def diameter(self, norm):
        if self.kind == "all":
            return math.inf
        if self.kind == "ball":
            # l2 ball measured in another norm still has a finite width
            scale = {"l2": 2.0, "l1": 2.0 * math.sqrt(self.n), "linf": 2.0}[norm]
            return scale * self.radius
        if self.kind == "box":
            return norm_value(self.hi - self.lo, norm)
        return 2.0 if norm == "l1" else (1.0 if norm == "linf" else math.sqrt(2.0))

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        if self.kind == "all":
            return True
        if self.kind == "ball":
            return norm_value(x - self.center, "l2") <= self.radius + tol
        if self.kind == "box":
            return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))
        return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - 1.0) <= tol)


def project(domain, x):
    """Euclidean projection onto ball or box; identity on all_of_space."""
    x = np.asarray(x, dtype=float)
    if domain.kind == "all":
        return x
    if domain.kind == "ball":
        d = x - domain.center
        dist = math.sqrt(float(np.sum(d * d)))
        if dist <= domain.radius:
            return x
        return domain.center + d * (domain.radius / dist)
    if domain.kind == "box":
        return np.minimum(np.maximum(x, domain.lo), domain.hi)
    raise NotImplementedError("Euclidean simplex projection is out of scope")


def bregman(reg, x, y):
    """Divergence induced by the regularizer.

    quadratic -> 0.5*||x - y||_2^2;  entropic -> KL(x || y) with the
    0*ln(0) = 0 convention (both arguments on the simplex).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if reg.kind == "quadratic":
        d = x - y
        return 0.5 * float(np.sum(d * d))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(x > 0, x * np.log(x / y), 0.0)
    return float(np.sum(terms))


def _check_pairing(reg, domain):
    if reg.kind == "quadratic" and domain.kind in ("all", "ball", "box"):
        return
    if reg.kind == "entropic" and domain.kind == "simplex":
        return
    raise ValueError(f"unsupported pairing ({reg.kind}, {domain.kind})")


def ftrl_argmin(reg, domain, cum_loss, inv_eta):
    """argmin_x <cum_loss, x> + inv_eta * R(x).

    inv_eta == 0 is only meaningful with a zero cumulative loss (returns
    the regularizer's argmin); otherwise the objective is unbounded and a
    ValueError is raised.
    """
    _check_pairing(reg, domain)
    cum_loss = np.asarray(cum_loss, dtype=float)
    if inv_eta < 0:
        raise ValueError("inv_eta must be >= 0")
    if inv_eta == 0.0:
        if np.any(cum_loss != 0.0):
            raise ValueError("inv_eta == 0 with a nonzero cumulative loss")
        return reg.argmin()
    if reg.kind == "quadratic":
        return project(domain, reg.center - cum_loss / inv_eta)
    w = -cum_loss / inv_eta
    w -= np.max(w)
    e = np.exp(w)
    return e / np.sum(e)


def md_argmin(reg, domain, x, loss, inv_eta):
    """argmin_y <loss, y> + inv_eta * B(y, x) from the current point x."""
    _check_pairing(reg, domain)
    if inv_eta <= 0:
        raise ValueError("inv_eta must be positive")
    x = np.asarray(x, dtype=float)
    loss = np.asarray(loss, dtype=float)
    if reg.kind == "quadratic":
        return project(domain, x - loss / inv_eta)
    with np.errstate(divide="ignore"):
        w = np.log(x) - loss / inv_eta
    w -= np.max(w)
    e = np.exp(w)
    return e / np.sum(e)


def scalar_lemma_check(which, x):
    """Floating-point check of one scalar inequality at x; True = holds.

    log_approx     (|x| < 1):  ln(1+x) >= x - x^2 / (2(1-|x|))
    exp_denom      (x < 3):    e^x <= 1 + x + (x^2/2) / (1 - x/3)
    exp_quadratic  (all x):    (e^x - x - 1)(1 - x/3) <= x^2/2
    """
    if which == "log_approx":
        if not abs(x) < 1.0:
            raise ValueError("log_approx needs |x| < 1")
        return math.log1p(x) >= x - x * x / (2.0 * (1.0 - abs(x)))
    if which == "exp_denom":
        if not x < 3.0:
            raise ValueError("exp_denom needs x < 3")
        return math.exp(x) <= 1.0 + x + (x * x / 2.0) / (1.0 - x / 3.0)
    if which == "exp_quadratic":
        return (math.expm1(x) - x) * (1.0 - x / 3.0) <= x * x / 2.0
    raise ValueError(f"unknown lemma {which!r}")
