"""Stream generation, comparators, run evaluation, and the verification
suites.  Streams are pure functions of (kind, params, seed), so every
expectation here is frozen against regeneration.
"""
import math
import os

import numpy as np
import pytest

from isotune.geometry import Domain
from isotune.harness import (
    LossStream,
    best_fixed,
    best_fixed_scalar,
    best_fixed_softbayes,
    evaluate_run,
    generate,
    load_replay,
    losses_to_prices,
    plateau_grad,
    plateau_loss,
    run_plateau,
    sample_comparators,
    verify_bounds,
    verify_invariance,
    verify_lemmas,
    verify_oracles,
)

OPEN_LOOP = ("iid_uniform", "iid_gaussian", "scale_jump", "tiny_scale", "adversarial_worstcase")


class TestStreams:
    @pytest.mark.parametrize("kind", OPEN_LOOP)
    def test_regeneration_is_bit_identical(self, kind):
        a = generate(LossStream(kind, n=3, t=200, seed=7))
        b = generate(LossStream(kind, n=3, t=200, seed=7))
        np.testing.assert_array_equal(a, b)
        c = generate(LossStream(kind, n=3, t=200, seed=8))
        assert not np.array_equal(a, c)

    def test_uniform_range(self):
        ls = generate(LossStream("iid_uniform", n=2, t=500, seed=0, lo=-1.0, hi=3.0))
        assert ls.shape == (500, 2)
        assert float(ls.min()) >= -1.0
        assert float(ls.max()) < 3.0

    def test_gaussian_sigma_scales_linearly(self):
        a = generate(LossStream("iid_gaussian", n=2, t=100, seed=3, sigma=1.0))
        b = generate(LossStream("iid_gaussian", n=2, t=100, seed=3, sigma=2.0))
        np.testing.assert_array_equal(2.0 * a, b)

    def test_scale_jump_follows_schedule(self):
        ls = generate(LossStream("scale_jump", n=2, t=400, seed=1))
        seg = np.minimum((np.arange(400) * 4) // 400, 3)
        sched = np.array([1.0, 1e3, 1e-3, 1.0])
        assert np.all(np.abs(ls) <= sched[seg][:, None])
        # the big segment really is big
        assert float(np.abs(ls[100:200]).max()) > 1.0

    def test_tiny_scale_stays_positive(self):
        ls = generate(LossStream("tiny_scale", n=2, t=500, seed=0))
        assert np.isfinite(ls).all()
        assert float(ls.min()) >= 0.0
        assert float(ls.max()) <= 1e-300
        assert float(ls.max()) > 0.0

    def test_adversarial_mixes_row_types(self):
        ls = generate(LossStream("adversarial_worstcase", n=3, t=400, seed=0))
        assert np.isfinite(ls).all()
        zero_rows = int(np.all(ls == 0.0, axis=1).sum())
        single_rows = int(((ls != 0.0).sum(axis=1) == 1).sum())
        assert zero_rows > 0
        assert single_rows > zero_rows

    def test_plateau_is_closed_loop(self):
        with pytest.raises(ValueError):
            generate(LossStream("plateau_exp", n=1, t=10))

    def test_validation(self):
        with pytest.raises(ValueError):
            LossStream("brownian")
        with pytest.raises(ValueError):
            LossStream("iid_uniform", t=0)
        with pytest.raises(ValueError):
            LossStream("iid_uniform", lo=1.0, hi=1.0)
        with pytest.raises(ValueError):
            LossStream("iid_gaussian", sigma=0.0)
        with pytest.raises(ValueError):
            LossStream("scale_jump", scales=())
        with pytest.raises(ValueError):
            LossStream("tiny_scale", scale=0.0)
        with pytest.raises(ValueError):
            LossStream("replay")


class TestReplay:
    def test_roundtrip(self, tmp_path):
        data = generate(LossStream("iid_gaussian", n=3, t=40, seed=5))
        path = tmp_path / "rounds.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("a,b,c\n")
            for row in data:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        loaded = load_replay(str(path))
        np.testing.assert_array_equal(loaded, data)
        via_stream = generate(LossStream("replay", path=str(path)))
        np.testing.assert_array_equal(via_stream, data)

    def test_header_required(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("l1,l2\n")
        with pytest.raises(ValueError):
            load_replay(str(path))

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("l1,l2\n1.0,2.0\n3.0\n")
        with pytest.raises(ValueError):
            load_replay(str(path))

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "inf.csv"
        path.write_text("l1\n1.0\ninf\n")
        with pytest.raises(ValueError):
            load_replay(str(path))


class TestPlateau:
    def test_loss_shape(self):
        assert plateau_loss(2.0) == 1.0
        assert plateau_loss(3.0) == 0.0
        assert plateau_loss(4.0) == pytest.approx(math.e - 1.0, rel=1e-15)

    def test_grad_shape(self):
        assert plateau_grad(-5.0) == -1.0
        assert plateau_grad(3.0) == 0.0
        assert plateau_grad(4.0) == pytest.approx(math.e, rel=1e-15)

    def test_tracks_the_kink(self):
        _, loop = run_plateau(t=600)
        xs = loop.trace.predictions[:, 0]
        assert float(np.abs(xs[200:] - 3.0).max()) <= 0.5

    def test_evaluate_run_bound(self):
        rec = evaluate_run("isogd", LossStream("plateau_exp", n=1, t=600))
        assert rec.regret <= rec.bound
        assert abs(float(rec.comparators[0][0]) - 3.0) <= 1e-6

    def test_simplex_learner_rejected(self):
        with pytest.raises(ValueError):
            evaluate_run("isohedge", LossStream("plateau_exp", n=1, t=10))


class TestBestFixed:
    def test_simplex_corner(self):
        losses = np.array([[1.0, 0.2, 0.5], [0.9, 0.1, 0.4]])
        x, v = best_fixed(losses, Domain.simplex(3))
        np.testing.assert_array_equal(x, [0.0, 1.0, 0.0])
        assert v == pytest.approx(0.3)

    def test_ball_closed_form(self):
        losses = np.array([[3.0, 4.0]])
        x, v = best_fixed(losses, Domain.ball(np.zeros(2), 1.0))
        np.testing.assert_allclose(x, [-0.6, -0.8])
        assert v == pytest.approx(-5.0)

    def test_ball_zero_total(self):
        x, v = best_fixed(np.zeros((3, 2)), Domain.ball(np.array([1.0, 2.0]), 1.0))
        np.testing.assert_array_equal(x, [1.0, 2.0])
        assert v == 0.0

    def test_box_sign_split(self):
        losses = np.array([[1.0, -2.0]])
        x, v = best_fixed(losses, Domain.box([-1.0, -1.0], [2.0, 2.0]))
        np.testing.assert_array_equal(x, [-1.0, 2.0])
        assert v == pytest.approx(-5.0)

    def test_unbounded_rejected(self):
        with pytest.raises(ValueError):
            best_fixed(np.ones((2, 2)), Domain.all_of_space(2))

    @pytest.mark.parametrize(
        "domain",
        [
            Domain.simplex(4),
            Domain.ball(np.array([0.5, -1.0, 0.0, 2.0]), 1.5),
            Domain.box(np.array([-1.0, 0.0, -2.0, 1.0]), np.array([1.0, 3.0, 0.0, 2.0])),
        ],
        ids=["simplex", "ball", "box"],
    )
    def test_beats_random_points(self, domain):
        losses = generate(LossStream("iid_gaussian", n=4, t=50, seed=9))
        total = losses.sum(axis=0)
        _, v = best_fixed(losses, domain)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            if domain.kind == "simplex":
                y = rng.dirichlet(np.ones(4))
            elif domain.kind == "ball":
                d = rng.normal(size=4)
                y = domain.center + domain.radius * (
                    rng.uniform() ** 0.25 / np.linalg.norm(d)
                ) * d
            else:
                y = domain.lo + rng.uniform(size=4) * (domain.hi - domain.lo)
            assert v <= float(total @ y) + 1e-9

    def test_scalar_ternary(self):
        x, v = best_fixed_scalar(lambda z: (z - 2.0) ** 2, 0.0, 10.0)
        assert x == pytest.approx(2.0, abs=1e-7)
        assert v == pytest.approx(0.0, abs=1e-12)

    def test_scalar_needs_interval(self):
        with pytest.raises(ValueError):
            best_fixed_scalar(lambda z: z, 1.0, 1.0)


class TestBestFixedSoftbayes:
    def test_symmetric_prices_give_uniform(self):
        prices = np.tile([[2.0, 0.5], [0.5, 2.0]], (50, 1))
        x, v = best_fixed_softbayes(prices)
        np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-4)
        # rebalancing beats holding either single asset
        assert v < -np.log(prices[:, 0]).sum() - 1.0

    def test_beats_random_portfolios(self):
        prices = losses_to_prices(generate(LossStream("iid_uniform", n=3, t=80, seed=2)))
        x, v = best_fixed_softbayes(prices)
        rng = np.random.default_rng(1)
        for _ in range(1000):
            y = rng.dirichlet(np.ones(3))
            vy = -float(np.log(prices @ y).sum())
            assert v <= vy + 1e-3


class TestLossesToPrices:
    def test_row_max_is_one(self):
        losses = generate(LossStream("iid_gaussian", n=4, t=60, seed=1))
        prices = losses_to_prices(losses)
        assert prices.shape == losses.shape
        np.testing.assert_allclose(prices.max(axis=1), 1.0)
        assert float(prices.min()) > 0.0

    def test_order_reversal(self):
        prices = losses_to_prices(np.array([[0.1, 0.9, 0.5]]))
        assert prices[0, 0] > prices[0, 2] > prices[0, 1]


class TestSampleComparators:
    def test_counts_and_feasibility(self):
        cases = [
            (Domain.simplex(4), 15),
            (Domain.ball(np.zeros(3), 1.0), 17),
            (Domain.box(np.zeros(2), np.ones(2)), 13),
            (Domain.all_of_space(2), 11),
        ]
        for domain, count in cases:
            pts = sample_comparators(domain, 0)
            assert len(pts) == count
            for p in pts:
                assert domain.contains(p)

    def test_deterministic(self):
        a = sample_comparators(Domain.simplex(3), 5)
        b = sample_comparators(Domain.simplex(3), 5)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)


class TestEvaluateRun:
    def test_zero_losses_mean_zero_regret(self, tmp_path):
        path = tmp_path / "zero.csv"
        path.write_text("a,b\n" + "0.0,0.0\n" * 5)
        rec = evaluate_run("isohedge", LossStream("replay", path=str(path)))
        assert rec.regret == 0.0
        assert rec.bound == 0.0
        assert rec.ratio == 0.0

    def test_bookkeeping_identities(self):
        rec = evaluate_run("isogd", LossStream("iid_gaussian", n=3, t=300, seed=4))
        np.testing.assert_allclose(np.cumsum(rec.trace.delta), rec.trace.Delta, rtol=1e-9)
        assert rec.cum_regret[-1] == pytest.approx(rec.regret, rel=1e-9)
        assert rec.regret == float(rec.regrets.max())
        assert len(rec.bounds) == len(rec.comparators)
        assert rec.wall_time >= 0.0

    def test_softbayes_total_includes_seed(self):
        rec = evaluate_run("isosoftbayes", LossStream("iid_uniform", n=3, t=50, seed=0))
        seeded = 2.0 * math.log(3.0) + float(rec.trace.delta.sum())
        assert rec.trace.Delta[-1] == pytest.approx(seeded, rel=1e-12)

    def test_uncertified_baseline_has_nan_bound(self):
        rec = evaluate_run("seqoptgd", LossStream("iid_uniform", n=2, t=100, seed=0))
        assert math.isnan(rec.bound)
        assert math.isnan(rec.ratio)
        assert np.isnan(rec.bounds).all()

    def test_overflow_raises_with_round_index(self, tmp_path):
        path = tmp_path / "huge.csv"
        path.write_text("l1\n" + "1e308\n" * 4)
        with pytest.raises(ArithmeticError, match="round 2"):
            evaluate_run("isogd", LossStream("replay", path=str(path)))

    def test_explicit_comparators_respected(self):
        comps = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.5, 0.5])]
        rec = evaluate_run(
            "isohedge", LossStream("iid_uniform", n=2, t=100, seed=1), comparators=comps
        )
        assert len(rec.regrets) == 3
        losses = generate(LossStream("iid_uniform", n=2, t=100, seed=1))
        expect = float(rec.values.sum() - (losses @ comps[2]).sum())
        assert rec.regrets[2] == pytest.approx(expect, rel=1e-12)


class TestVerifySuites:
    def test_lemma_grids_clean(self):
        report = verify_lemmas(points=2000)
        assert set(report) == {"log_approx", "exp_denom", "exp_quadratic"}
        assert all(v == [] for v in report.values())

    def test_oracles_all_pass(self):
        checks = verify_oracles()
        assert len(checks) >= 20
        bad = [c for c in checks if not c[3]]
        assert bad == []

    def test_invariance_all_pass(self):
        rows = verify_invariance(t=200)
        assert len(rows) > 0
        assert all(r[5] for r in rows)

    def test_bounds_small_sweep_clean(self):
        checked, failures = verify_bounds(
            algos=("isogd", "isoprod"), kinds=("iid_uniform",), seeds=range(2), ns=(2,), t=400
        )
        assert checked > 0
        assert failures == []
