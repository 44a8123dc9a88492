"""Pure-Python batch runner: drives the learner classes round by round.

This is the reference implementation and the fallback when the compiled
core is unavailable.  Both backends fill identical RunTrace layouts.
"""
import math

import numpy as np

from .learners import make_learner
from .trace import RunTrace


def run(cfg, losses):
    losses = np.asarray(losses, dtype=float)
    t_rounds, n = losses.shape
    learner = make_learner(cfg)
    preds = np.empty((t_rounds, n))
    round_loss = np.empty(t_rounds)
    delta = np.empty(t_rounds)
    total = np.empty(t_rounds)
    eta = np.empty(t_rounds)
    null = np.zeros(t_rounds, dtype=bool)
    ml = cfg.algo == "isomlprod"
    hedge = cfg.algo == "isohedge"
    delta_vec = np.empty((t_rounds, n)) if ml else None
    total_vec = np.empty((t_rounds, n)) if ml else None
    m_used = np.empty(t_rounds) if hedge else None

    for t in range(t_rounds):
        eta[t] = _current_eta(cfg.algo, learner)
        out = learner.step(losses[t])
        preds[t] = out.prediction
        round_loss[t] = out.bar_loss
        delta[t] = out.delta
        null[t] = out.was_null
        if ml:
            delta_vec[t] = learner.delta_vec
            total_vec[t] = learner.total_vec
            total[t] = learner.total_vec.max()
        else:
            total[t] = learner.state.delta_total
            if cfg.algo in ("aogd", "seqoptgd"):
                eta[t] = _post_eta(learner)
        if hedge:
            m_used[t] = learner.last_m

    return RunTrace(
        algo=cfg.algo,
        q=cfg.q,
        predictions=preds,
        round_loss=round_loss,
        delta=delta,
        Delta=total,
        eta=eta,
        was_null=null,
        delta_vec=delta_vec,
        total_vec=total_vec,
        m_used=m_used,
    )


def _current_eta(algo, learner):
    # rate in effect when the round's prediction was formed
    if algo == "isomlprod":
        top = learner.total_vec.max()
        return learner.q / top if top > 0 else math.inf
    if algo in ("aogd", "seqoptgd"):
        return math.inf
    return learner.state.eta


def _post_eta(learner):
    # these two set the round's rate after seeing the gradient
    if learner.algo == "aogd":
        return 1.0 / learner.inv_eta if learner.inv_eta > 0 else math.inf
    return 1.0 / (learner.eps + math.sqrt(learner.sum_sq))
