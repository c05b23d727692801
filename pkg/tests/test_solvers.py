import numpy as np
import pytest

import quadinv as qi
from quadinv.solvers import CommutatorDriftError

from test_steps import scalar_error_recurrence


class TestSolveInverseGd:
    def test_converged_at_start(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        res = qi.solve_inverse_gd(x, w_star, qi.SolverConfig(tol_loss=1e-18))
        assert res.stop is qi.StopReason.CONVERGED
        assert res.trace.final.iter == 0

    def test_scalar_losses_match_recurrence(self):
        x = 2.0
        res = qi.solve_inverse_gd(np.array([[x]]), np.array([[0.4]]),
                                  qi.SolverConfig(max_iters=6, tol_loss=1e-30))
        us = scalar_error_recurrence(-0.1, x, res.trace.final.iter)
        expected = [0.5 * (u * x) ** 2 for u in us]
        for got, want in zip(res.trace.losses(), expected):
            assert got == pytest.approx(want, rel=1e-12)

    def test_quadratic_loss_decay_shape(self):
        res = qi.solve_inverse_gd(np.array([[2.0]]), np.array([[0.4]]),
                                  qi.SolverConfig(max_iters=4, tol_loss=1e-30))
        losses = res.trace.losses()
        assert losses[0] == pytest.approx(0.5 * 0.2 ** 2, rel=1e-15)
        assert losses[1] == pytest.approx(0.5 * 0.072 ** 2, rel=1e-12)

    def test_divergence_outside_basin(self):
        res = qi.solve_inverse_gd(np.array([[2.0]]), np.array([[10.0]]),
                                  qi.SolverConfig(max_iters=50))
        assert res.stop is qi.StopReason.DIVERGED

    def test_stall_at_zero(self):
        x = qi.make_rng(2).standard_normal((5, 5))
        res = qi.solve_inverse_gd(x, np.zeros((5, 5)), qi.SolverConfig(max_iters=10))
        assert res.stop is qi.StopReason.STALLED
        losses = res.trace.losses()
        assert losses[-1] == losses[0]

    def test_rejects_wrong_rule(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        cfg = qi.SolverConfig(step_rule=qi.AdaptiveRoot(2))
        with pytest.raises(ValueError):
            qi.solve_inverse_gd(x, w_star, cfg)

    def test_fixed_rule_converges_linearly(self, inv_problem_n10):
        x, w_star, sigma = inv_problem_n10
        eta = 0.5 / sigma[0] ** 2
        cfg = qi.SolverConfig(step_rule=qi.FixedStep(eta), tol_loss=1e-6, max_iters=200000)
        res = qi.solve_inverse_gd(x, np.zeros_like(x), cfg, w_star=w_star)
        assert res.stop is qi.StopReason.CONVERGED

    def test_record_every_thinning(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        cfg = qi.SolverConfig(max_iters=7, tol_loss=1e-300, divergence_factor=1e12,
                              record_every=3)
        res = qi.solve_inverse_gd(x, 0.4 * w_star, cfg)
        iters = [r.iter for r in res.trace]
        assert iters == [0, 3, 6, 7]  # initial, thinned, terminal


class TestSolveInverseSgd:
    def test_n1_reduces_to_gd_exactly(self):
        x, w0 = np.array([[2.0]]), np.array([[0.25]])
        kw = dict(tol_loss=1e-300, divergence_factor=1e12)
        gd = qi.solve_inverse_gd(x, w0, qi.SolverConfig(max_iters=4, **kw))
        sgd = qi.solve_inverse_sgd(x, w0, qi.SolverConfig(
            schedule=qi.EpochSchedule.CYCLIC, max_epochs=4, **kw))
        assert gd.trace.losses() == sgd.trace.losses()
        assert np.array_equal(gd.w, sgd.w)

    def test_n1_reduces_to_gd_generic_input(self):
        x, w0 = np.array([[3.7]]), np.array([[0.11]])
        gd = qi.solve_inverse_gd(x, w0, qi.SolverConfig(max_iters=12))
        sgd = qi.solve_inverse_sgd(x, w0, qi.SolverConfig(
            schedule=qi.EpochSchedule.CYCLIC, max_epochs=12))
        for a, b in zip(gd.trace.losses(), sgd.trace.losses()):
            assert a == pytest.approx(b, rel=1e-13)

    def test_cyclic_epoch_is_permutation(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        cfg = qi.SolverConfig(schedule=qi.EpochSchedule.CYCLIC, max_epochs=5,
                              tol_loss=1e-300, divergence_factor=1e12, seed=3)
        res = qi.solve_inverse_sgd(x, 0.5 * w_star, cfg)
        samples = [r.sample_index for r in res.trace if r.sample_index is not None]
        n = x.shape[0]
        for e in range(5):
            epoch_samples = samples[e * n:(e + 1) * n]
            assert sorted(epoch_samples) == list(range(n))

    def test_iid_draws_with_replacement(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        cfg = qi.SolverConfig(schedule=qi.EpochSchedule.IID, max_epochs=20,
                              tol_loss=1e-300, divergence_factor=1e12, seed=3)
        res = qi.solve_inverse_sgd(x, 0.5 * w_star, cfg)
        samples = [r.sample_index for r in res.trace if r.sample_index is not None]
        n = x.shape[0]
        assert any(sorted(samples[e * n:(e + 1) * n]) != list(range(n)) for e in range(20))

    def test_2x2_matches_scripted_oracle(self):
        # Direct sequential evaluation of the per-column update, same
        # permutation stream as the solver.
        n, seed = 2, 7
        x = np.diag([2.0, 4.0])
        w_star = np.diag([0.5, 0.25])
        w0 = 0.5 * w_star
        cfg = qi.SolverConfig(schedule=qi.EpochSchedule.CYCLIC, max_epochs=3, seed=seed,
                              tol_loss=1e-300, divergence_factor=1e12)
        res = qi.solve_inverse_sgd(x, w0.copy(), cfg, w_star=w_star)
        rng = qi.make_rng(seed)
        w = w0.copy()
        for _ in range(3):
            for i in rng.permutation(n):
                i = int(i)
                e = np.zeros(n)
                e[i] = 1.0
                u = w @ x[:, i]
                v = w.T @ u
                w = w + np.multiply.outer(e - u, v)
        assert np.array_equal(w, res.w)

    def test_per_epoch_error_has_no_linear_term(self):
        # Shrinking U0 by 2 must shrink the epoch-1 error by ~4 (leading
        # order quadratic); a linear term would give a factor of ~2.
        n, seed = 2, 7
        x = np.diag([2.0, 4.0])
        w_star = np.diag([0.5, 0.25])
        u0 = np.diag([0.05, 0.025])

        def epoch1_err(scale):
            cfg = qi.SolverConfig(schedule=qi.EpochSchedule.CYCLIC, max_epochs=1, seed=seed)
            res = qi.solve_inverse_sgd(x, w_star + scale * u0, cfg, w_star=w_star)
            return res.trace.epoch_errs()[-1]

        ratio = epoch1_err(1.0) / epoch1_err(0.5)
        assert 3.5 <= ratio <= 4.5

    def test_requires_schedule(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        with pytest.raises(ValueError):
            qi.solve_inverse_sgd(x, w_star, qi.SolverConfig())

    def test_divergence_guard(self):
        res = qi.solve_inverse_sgd(np.array([[2.0]]), np.array([[10.0]]),
                                   qi.SolverConfig(schedule=qi.EpochSchedule.CYCLIC,
                                                   max_epochs=50))
        assert res.stop is qi.StopReason.DIVERGED

    def test_stall_at_zero(self, inv_problem_n10):
        x, _, _ = inv_problem_n10
        res = qi.solve_inverse_sgd(x, np.zeros_like(x),
                                   qi.SolverConfig(schedule=qi.EpochSchedule.CYCLIC,
                                                   max_epochs=5))
        assert res.stop is qi.StopReason.STALLED

    def test_epoch_counter_and_boundaries(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        cfg = qi.SolverConfig(schedule=qi.EpochSchedule.CYCLIC, max_epochs=3,
                              tol_loss=1e-300, divergence_factor=1e12)
        res = qi.solve_inverse_sgd(x, 0.5 * w_star, cfg)
        boundaries = res.trace.epoch_boundary_records()
        assert [r.epoch for r in boundaries] == [0, 1, 2, 3]
        assert [r.iter for r in boundaries] == [0, 10, 20, 30]


class TestSolveInverseRoot:
    def test_d1_matches_gd_on_spd(self):
        x, droot = qi.gen_spd(6, qi.make_rng(12), condition_cap=5.0)
        w0 = qi.make_init(qi.ScaledIdentity(0.4), 6)
        cfg_root = qi.SolverConfig(step_rule=qi.AdaptiveRoot(1), max_iters=30)
        cfg_gd = qi.SolverConfig(max_iters=30)
        res_root = qi.solve_inverse_root(x, w0, 1, cfg_root)
        res_gd = qi.solve_inverse_gd(x, w0, cfg_gd)
        assert res_root.trace.final.iter == res_gd.trace.final.iter
        for a, b in zip(res_root.trace.losses(), res_gd.trace.losses()):
            assert a == pytest.approx(b, abs=1e-10, rel=1e-10)

    def test_d2_scalar_error_sequence(self):
        x = np.array([[4.0]])
        cfg = qi.SolverConfig(step_rule=qi.AdaptiveRoot(2), max_iters=10)
        res = qi.solve_inverse_root(x, np.array([[0.55]]), 2, cfg, w_star=np.array([[0.5]]))
        errs = res.trace.errs()
        assert errs[0] == pytest.approx(0.05, rel=1e-12)
        assert errs[1] == pytest.approx(0.0198775, rel=1e-6)
        assert errs[2] <= 10.0 * errs[1] ** 2  # quadratic decay continues

    def test_ground_truth_converged_at_start(self):
        x, droot = qi.gen_spd(7, qi.make_rng(3), condition_cap=5.0)
        gt = droot(2)
        cfg = qi.SolverConfig(step_rule=qi.AdaptiveRoot(2), tol_loss=1e-18)
        res = qi.solve_inverse_root(x, gt, 2, cfg)
        assert res.stop is qi.StopReason.CONVERGED and res.trace.final.iter == 0

    def test_rule_mismatch_rejected(self):
        x, _ = qi.gen_spd(4, qi.make_rng(1))
        with pytest.raises(ValueError):
            qi.solve_inverse_root(x, np.eye(4), 2, qi.SolverConfig(step_rule=qi.AdaptiveRoot(3)))

    def test_small_scale_quadratic_convergence_with_bounded_drift(self):
        # Same content as the large-scale criterion, at a spectrum where the
        # commuting iteration is numerically stable end to end.
        n = 8
        x, droot = qi.gen_spd(n, qi.make_rng(22), condition_cap=3.0)
        gt = droot(2)
        c = 0.9 * (float(np.trace(x)) / n) ** -0.5
        w0 = qi.make_init(qi.ScaledIdentity(c), n)
        cfg = qi.SolverConfig(step_rule=qi.AdaptiveRoot(2), tol_loss=1e-24, max_iters=60)
        res = qi.solve_inverse_root(x, w0, 2, cfg, w_star=gt)
        assert res.stop is qi.StopReason.CONVERGED
        resid = qi.frobenius_norm(np.eye(n) - qi.matmul(qi.matmul(res.w, res.w), x))
        assert resid <= 1e-10
        s = qi.frobenius_norm(gt)
        est = qi.estimate_order(res.trace.errs(), (s, 1e-13 * s))
        assert est.sufficient and est.order >= 1.8
        w, drift = w0.copy(), 0.0
        for _ in range(res.trace.final.iter):
            rel = qi.frobenius_norm(qi.matmul(w, x) - qi.matmul(x, w)) / (
                qi.frobenius_norm(w) * qi.frobenius_norm(x))
            drift = max(drift, rel)
            w = qi.root_gd_step(w, x, 2)
        assert drift <= 1e-8

    def test_wide_spectrum_drift_is_detected(self):
        # At desk scale with a spread spectrum the commuting-form iteration
        # amplifies non-commuting rounding noise and the guard must fire
        # rather than silently return garbage.
        n = 50
        x, droot = qi.gen_spd(n, qi.make_rng(927))
        c = 0.9 * (float(np.trace(x)) / n) ** -0.5
        w0 = qi.make_init(qi.ScaledIdentity(c), n)
        cfg = qi.SolverConfig(step_rule=qi.AdaptiveRoot(2), tol_loss=1e-24, max_iters=100)
        with pytest.raises(CommutatorDriftError):
            qi.solve_inverse_root(x, w0, 2, cfg)


class TestSolveHybrid:
    def _configs(self, eta=0.1, warm_iters=10000):
        warm = qi.SolverConfig(step_rule=qi.FixedStep(eta), max_iters=warm_iters)
        adaptive = qi.SolverConfig(step_rule=qi.AdaptiveRight(), tol_loss=1e-24, max_iters=50)
        return warm, adaptive

    def test_scalar_warm_phase_matches_fixed_map(self):
        x = np.array([[2.0]])
        warm, adaptive = self._configs()
        res = qi.solve_hybrid(x, warm, adaptive, switch_loss=1e-4)
        # scripted warm map: w <- w + 0.2 (1 - 2w) from 0
        w, expected = 0.0, []
        while 0.5 * (1 - 2 * w) ** 2 >= 1e-4:
            expected.append(0.5 * (1 - 2 * w) ** 2)
            w = w + 0.1 * (1 - 2 * w) * 2
        warm_records = [r for r in res.trace if r.phase == "warm"]
        assert len(warm_records) == len(expected) + 1
        for r, want in zip(warm_records, expected):
            assert r.loss == pytest.approx(want, rel=1e-12)
        assert warm_records[-1].loss < 1e-4
        assert res.stop is qi.StopReason.CONVERGED

    def test_exactly_one_phase_switch(self):
        spec = qi.RandomMatrixSpec(n=12, seed=1, condition_cap=10.0)
        x, w_star, _ = qi.gen_invertible(spec, max_redraws=100000)
        warm, adaptive = self._configs(warm_iters=100000)
        res = qi.solve_hybrid(x, warm, adaptive, switch_loss=1e-4, w_star=w_star)
        assert res.stop is qi.StopReason.CONVERGED
        assert len(res.trace.phase_switch_iters()) == 1

    def test_switch_already_satisfied(self):
        x = np.array([[2.0], ])
        warm, adaptive = self._configs()
        res = qi.solve_hybrid(x, warm, adaptive, switch_loss=10.0)
        warm_records = [r for r in res.trace if r.phase == "warm"]
        assert len(warm_records) == 1 and warm_records[0].iter == 0

    def test_switch_loss_below_tol_rejected(self):
        x = np.array([[2.0]])
        warm, adaptive = self._configs()
        with pytest.raises(ValueError):
            qi.solve_hybrid(x, warm, adaptive, switch_loss=1e-30)

    def test_warm_budget_exhaustion(self):
        x = np.array([[2.0]])
        warm, adaptive = self._configs(warm_iters=2)
        res = qi.solve_hybrid(x, warm, adaptive, switch_loss=1e-8)
        assert res.stop is qi.StopReason.WARM_PHASE_STALLED

    def test_kaczmarz_warm_phase(self):
        spec = qi.RandomMatrixSpec(n=10, seed=5, condition_cap=10.0)
        x, w_star, _ = qi.gen_invertible(spec, max_redraws=100000)
        warm = qi.SolverConfig(max_iters=5000, seed=3)
        adaptive = qi.SolverConfig(tol_loss=1e-24, max_iters=50)
        res = qi.solve_hybrid(x, warm, adaptive, switch_loss=1e-4,
                              warm_method="kaczmarz", w_star=w_star)
        assert res.stop is qi.StopReason.CONVERGED
        assert len(res.trace.phase_switch_iters()) == 1


class TestBaselineDrivers:
    def test_newton_converges(self, inv_problem_n10):
        x, w_star, _ = inv_problem_n10
        res = qi.solve_newton(x, 0.4 * w_star, qi.SolverConfig(max_iters=30), w_star=w_star)
        assert res.stop is qi.StopReason.CONVERGED

    def test_kaczmarz_driver_converges(self):
        spec = qi.RandomMatrixSpec(n=8, seed=5, condition_cap=5.0)
        x, w_star, _ = qi.gen_invertible(spec, max_redraws=1000000)
        cfg = qi.SolverConfig(tol_loss=1e-12, max_iters=2000, seed=1)
        res = qi.solve_kaczmarz(x, np.zeros_like(x), cfg, w_star=w_star)
        assert res.stop is qi.StopReason.CONVERGED

    def test_polyrate_driver_linear_rate(self):
        from quadinv.presets import normalized_rank_deficient
        x, y, w_star = normalized_rank_deficient(8, 1, 4)
        cfg = qi.SolverConfig(step_rule=qi.MatrixPolynomial((0.0, 1.0)), max_iters=500)
        res = qi.solve_polyrate(x, y, 0.999 * w_star, cfg, w_star=w_star)
        assert res.stop in (qi.StopReason.MAX_ITERS, qi.StopReason.CONVERGED)
        errs = res.trace.errs()
        assert errs[-1] < errs[0]  # it does make progress
        s = qi.frobenius_norm(w_star)
        est = qi.estimate_order(errs, (s, 1e-13 * s))
        assert est.sufficient and 0.8 <= est.order <= 1.2
