"""Loop-backend selection.

At import time the compiled extension is preferred; the pure-Python driver
is the fallback and the reference.  Configurations without a compiled
kernel (e.g. FTRL with a quadratic regularizer) transparently use the
Python path, so the external behavior never depends on the build.
"""
import numpy as np

from . import _pyloop
from .trace import RunTrace

try:
    from . import _fastloop
except ImportError:
    _fastloop = None

BACKEND = "compiled" if _fastloop is not None else "python"

_DOM = {"all": 0, "ball": 1, "box": 2}


def run(cfg, losses, force_python=False):
    """Run one learner over a (T, N) loss matrix, returning a RunTrace."""
    losses = np.ascontiguousarray(np.asarray(losses, dtype=np.float64))
    if losses.ndim != 2:
        raise ValueError("losses must be a (T, N) matrix")
    if losses.shape[1] != cfg.n:
        raise ValueError(f"loss width {losses.shape[1]} != configured n {cfg.n}")
    if force_python or _fastloop is None:
        return _pyloop.run(cfg, losses)
    trace = _compiled_run(cfg, losses)
    return trace if trace is not None else _pyloop.run(cfg, losses)


def _dom_args(domain):
    n = domain.n
    center = np.zeros(n)
    lo = np.zeros(n)
    hi = np.zeros(n)
    radius = 0.0
    if domain.kind == "ball":
        center = np.ascontiguousarray(domain.center, dtype=np.float64)
        radius = domain.radius
    elif domain.kind == "box":
        lo = np.ascontiguousarray(domain.lo, dtype=np.float64)
        hi = np.ascontiguousarray(domain.hi, dtype=np.float64)
    return _DOM[domain.kind], center, radius, lo, hi


def _compiled_run(cfg, losses):
    a = cfg.algo
    extra = {}
    if a in ("isogd", "isomd") and cfg.reg.kind == "quadratic":
        kind, center, radius, lo, hi = _dom_args(cfg.domain)
        x1 = np.ascontiguousarray(cfg.x1, dtype=np.float64)
        parts = _fastloop.run_md_quadratic(losses, cfg.q, cfg.c, x1, kind, center, radius, lo, hi)
    elif a == "isomd" and cfg.reg.kind == "entropic":
        parts = _fastloop.run_md_entropic(losses, cfg.q, cfg.c)
    elif a == "isoftrl" and cfg.reg.kind == "entropic":
        parts = _fastloop.run_ftrl_entropic(losses, cfg.q, cfg.c)
    elif a == "aogd":
        kind, center, radius, lo, hi = _dom_args(cfg.domain)
        x1 = np.ascontiguousarray(cfg.x1, dtype=np.float64)
        alphas = np.zeros(losses.shape[0])
        parts = _fastloop.run_aogd(losses, cfg.q, x1, alphas, kind, center, radius, lo, hi)
    elif a == "seqoptgd":
        kind, center, radius, lo, hi = _dom_args(cfg.domain)
        x1 = np.ascontiguousarray(cfg.x1, dtype=np.float64)
        parts = _fastloop.run_seqopt(losses, cfg.eps, x1, kind, center, radius, lo, hi)
    elif a == "isoprod":
        parts = _fastloop.run_prod(losses, cfg.q, cfg.c)
    elif a == "isomlprod":
        parts = _fastloop.run_mlprod(losses, cfg.q)
        extra = {"delta_vec": parts[6], "total_vec": parts[7]}
    elif a == "isohedge":
        parts = _fastloop.run_hedge(losses, cfg.q, cfg.m_pivot == "zero")
        extra = {"m_used": parts[6]}
    elif a == "isosoftbayes":
        if np.any(losses < 0):
            raise ValueError("price relatives must be >= 0")
        parts = _fastloop.run_softbayes(losses, cfg.q)
    else:
        return None
    return RunTrace(
        algo=a,
        q=cfg.q,
        predictions=parts[0],
        round_loss=parts[1],
        delta=parts[2],
        Delta=parts[3],
        eta=parts[4],
        was_null=parts[5].astype(bool),
        **extra,
    )
