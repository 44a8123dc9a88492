"""Per-round record of a finished run, shared by both loop backends."""
from dataclasses import dataclass

import numpy as np


@dataclass
class RunTrace:
    """Arrays indexed by round (0-based internally, reported 1-based).

    predictions  (T, N) point played each round
    round_loss   (T,)   incurred loss <x_t, l_t> (portfolios: -ln<x_t, p_t>)
    delta        (T,)   rate-denominator increment (isomlprod: max over coordinates)
    Delta        (T,)   running total after the round (isomlprod: max over coordinates)
    eta          (T,)   rate in effect for the round; +inf before anything accumulates
    was_null     (T,)   null-update flag
    delta_vec/total_vec  (T, N) per-coordinate ledgers, isomlprod only
    m_used       (T,)   pivot losses, isohedge only
    """

    algo: str
    q: float
    predictions: np.ndarray
    round_loss: np.ndarray
    delta: np.ndarray
    Delta: np.ndarray
    eta: np.ndarray
    was_null: np.ndarray
    delta_vec: np.ndarray = None
    total_vec: np.ndarray = None
    m_used: np.ndarray = None

    def __len__(self):
        return len(self.delta)

    def check_finite(self):
        """Round index (1-based) of the first non-finite value, or 0."""
        for arr in (self.predictions, self.round_loss, self.delta, self.Delta,
                    self.delta_vec, self.total_vec):
            if arr is None:
                continue
            bad = ~np.isfinite(arr)
            if bad.any():
                return int(np.flatnonzero(bad.any(axis=1) if arr.ndim == 2 else bad)[0]) + 1
        return 0
