"""Core adaptive-rate machinery: the crossing operator, the running
accumulator, the factor-2 and square-root sandwiches, and null triggers.

Expected constants were produced by independent bisection / brute-force
grid arithmetic and are frozen here.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isotune.iso_core import (
    IsotuningState,
    MonotoneFn,
    hindsight_bound,
    iso_point,
    iso_solve,
    isotune_step,
    null_trigger,
    run_isotuning,
    seqopt_rate,
    sqrt_bound,
)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


class TestIsoSolve:
    def test_reciprocal_golden_ratio(self):
        # X = 1 + 1/X has the golden ratio as its positive root
        x = iso_solve(MonotoneFn.reciprocal(1.0), 1.0)
        assert x == pytest.approx(GOLDEN, abs=1e-12)

    def test_exp_decay_fixed_point(self):
        x = iso_solve(MonotoneFn.exp_decay(), 0.0)
        assert x == pytest.approx(0.5671432904097835, abs=1e-9)

    def test_scaled_reciprocal_closed_form(self):
        x = iso_solve(MonotoneFn.scaled_reciprocal(3.0, 1.0), 2.0)
        assert x == pytest.approx(2.79128784747792, abs=1e-9)

    def test_constant(self):
        assert iso_solve(MonotoneFn.constant(2.5), 1.0) == pytest.approx(3.5)

    def test_zero_coefficient_is_identity(self):
        assert iso_solve(MonotoneFn.reciprocal(0.0), 4.0) == pytest.approx(4.0)

    @given(
        a=st.floats(min_value=1e-12, max_value=1e12),
        base=st.floats(min_value=0.0, max_value=1e9),
    )
    @settings(max_examples=300, deadline=None)
    def test_reciprocal_residual(self, a, base):
        # the returned X satisfies X = base + a/X
        x = iso_solve(MonotoneFn.reciprocal(a), base)
        assert x > 0
        assert x == pytest.approx(base + a / x, rel=1e-9)

    @given(
        a=st.floats(min_value=1e-9, max_value=1e6),
        b=st.floats(min_value=0.0, max_value=1e3),
        base=st.floats(min_value=0.0, max_value=1e6),
    )
    @settings(max_examples=300, deadline=None)
    def test_scaled_reciprocal_residual(self, a, b, base):
        x = iso_solve(MonotoneFn.scaled_reciprocal(a, b), base)
        assert x == pytest.approx(base + a / (x + b), rel=1e-9)


class TestIsoPoint:
    def test_reciprocal_sqrt(self):
        # slope*y = a/y crosses at y = sqrt(a/slope); value slope*y
        assert iso_point(MonotoneFn.reciprocal(2.0), 1.0) == pytest.approx(
            math.sqrt(2.0), abs=1e-12
        )

    def test_exp_decay_crossing(self):
        # bisection oracle: 2y = e^{-y}
        got = iso_point(MonotoneFn.exp_decay(), 2.0)
        y = got / 2.0
        assert 2.0 * y == pytest.approx(math.exp(-y), abs=1e-9)

    def test_constant(self):
        assert iso_point(MonotoneFn.constant(3.0), 5.0) == pytest.approx(3.0)


class TestIsotuneStep:
    def test_accumulates(self):
        s = IsotuningState(q=1.0)
        s = isotune_step(s, 0.5)
        s = isotune_step(s, 0.25)
        assert s.delta_total == pytest.approx(0.75)
        assert s.t == 2
        assert s.eta == pytest.approx(1.0 / 0.75)

    def test_eta_infinite_before_accumulation(self):
        assert IsotuningState(q=2.0).eta == math.inf

    def test_negative_delta_rejected(self):
        with pytest.raises(ValueError):
            isotune_step(IsotuningState(q=1.0), -1e-9)

    def test_null_ledger(self):
        s = IsotuningState(q=1.0)
        s = isotune_step(s, 0.5, was_null=True)
        s = isotune_step(s, 0.1)
        assert s.null_rounds == ((1, 0.5),)

    def test_max_delta_tracked(self):
        s = IsotuningState(q=1.0)
        for d in (0.5, 2.0, 1.0):
            s = isotune_step(s, d)
        assert s.max_delta == pytest.approx(2.0)


class TestSandwiches:
    def test_sqrt_sandwich_exact_small(self):
        # X_3 for a=[1,1,1]: closed-form recursion, frozen oracle
        xs = run_isotuning([MonotoneFn.reciprocal(1.0)] * 3)
        lo, hi = sqrt_bound([1.0, 1.0, 1.0])
        assert lo == pytest.approx(math.sqrt(6.0) - 1.0)
        assert hi == pytest.approx(math.sqrt(6.0))
        assert lo - 1e-12 <= xs[-1] <= hi + 1e-12

    @given(
        seq=st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=1, max_size=60)
    )
    @settings(max_examples=200, deadline=None)
    def test_sqrt_sandwich_property(self, seq):
        xs = run_isotuning([MonotoneFn.reciprocal(a) for a in seq])
        lo, hi = sqrt_bound(seq)
        x = xs[-1]
        slack = 1e-9 * max(1.0, hi)
        assert x <= hi + slack
        # the max-a lower bound needs increments <= max a, which holds
        # once the running total reaches 1; the universal form subtracts
        # the largest realized increment instead
        deltas = np.diff(np.concatenate([[0.0], xs]))
        assert x >= hi - float(deltas.max()) - slack
        if seq[0] >= 1.0:
            assert x >= lo - slack

    def test_factor_two_hindsight(self):
        # a=[1,1,1]: M* = 2*sqrt(3) at x* = sqrt(3)
        gs = [MonotoneFn.reciprocal(1.0)] * 3
        m_star, x_star = hindsight_bound(gs)
        assert m_star == pytest.approx(2.0 * math.sqrt(3.0), rel=1e-4)
        assert x_star == pytest.approx(math.sqrt(3.0), rel=1e-3)
        x = run_isotuning(gs)[-1]
        assert 0.5 * m_star * (1 - 1e-3) <= x <= m_star * (1 + 1e-3)

    def test_hindsight_empty(self):
        assert hindsight_bound([]) == (0.0, 0.0)

    def test_monotone_total(self):
        xs = run_isotuning([MonotoneFn.reciprocal(a) for a in (1.0, 0.0, 2.0, 0.5)])
        assert np.all(np.diff(xs) >= 0)


class TestOffsets:
    def test_offset_bound(self):
        # running with per-round extra offsets b_t cannot push the total
        # more than max b_t above the unoffset run
        a = [0.5, 1.0, 0.25, 2.0]
        b = [0.3, 0.0, 0.8, 0.1]
        plain = run_isotuning([MonotoneFn.reciprocal(x) for x in a])[-1]
        bumped = 0.0
        for ai, bi in zip(a, b):
            bumped = iso_solve(MonotoneFn.reciprocal(ai), bumped + bi)
        assert bumped <= plain + max(b) + 1e-9


class TestNullTrigger:
    def test_zero_total_with_positive_mass(self):
        s = IsotuningState(q=1.0)
        assert null_trigger(MonotoneFn.reciprocal(1.0), s)

    def test_reciprocal_threshold_strict(self):
        # trigger iff a > c * Delta^2
        s = IsotuningState(q=1.0, delta_total=2.0, t=1)
        assert not null_trigger(MonotoneFn.reciprocal(4.0), s)
        assert null_trigger(MonotoneFn.reciprocal(4.0 + 1e-9), s)

    def test_scale_free(self):
        for c in (1e-6, 1.0, 1e6):
            s = IsotuningState(q=1.0, delta_total=2.0 * c, t=1)
            assert null_trigger(MonotoneFn.reciprocal(4.01 * c * c), s)
            assert not null_trigger(MonotoneFn.reciprocal(3.99 * c * c), s)


class TestSeqoptRate:
    def test_values(self):
        assert seqopt_rate(4.0, 1.0) == pytest.approx(2.0)
        assert seqopt_rate(0.0, 3.0) == 0.0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            seqopt_rate(-1.0, 1.0)
        with pytest.raises(ValueError):
            seqopt_rate(1.0, 0.0)


class TestMonotoneFn:
    def test_negative_coefficient_rejected(self):
        with pytest.raises(ValueError):
            MonotoneFn.reciprocal(-1.0)

    def test_array_evaluation(self):
        g = MonotoneFn.reciprocal(2.0)
        ys = np.array([1.0, 2.0, 4.0])
        assert np.allclose(g(ys), 2.0 / ys)

    def test_limit(self):
        assert MonotoneFn.reciprocal(1.0).limit_at(0.0) == math.inf
        assert MonotoneFn.constant(3.0).limit_at(0.0) == 3.0
