import math

import numpy as np
import pytest

from dsm import (
    NumericalFailure,
    add_noise,
    default_newton_tol,
    flow_field,
    integrate_flow,
    jacobian,
    minimal_norm_solution,
    norm,
    residual_value,
    solve_noisy_to_stopping,
    solve_regularized,
    solve_to_stopping,
    stopping_time,
)

from conftest import identity_problem


class TestStoppingTime:
    def test_reciprocal_e(self):
        assert stopping_time(math.exp(-1.0)) == pytest.approx(2.0, rel=1e-14)

    def test_one_tenth(self):
        assert stopping_time(0.1) == pytest.approx(4.605170186, abs=5e-10)

    def test_near_one(self):
        assert stopping_time(0.99) == pytest.approx(0.020100671, abs=1e-9)

    def test_rejects_outside_unit_interval(self):
        for eps in (0.0, -0.5, 1.0, 2.0):
            with pytest.raises(ValueError):
                stopping_time(eps)


class TestFlowField:
    def test_identity_hand_value(self):
        # operator u, zero data, eps 1: field is -(2I)^-1 (2u) = -u
        p = identity_problem(2)
        rhs = flow_field(p, 1.0)
        np.testing.assert_allclose(rhs(np.array([1.0, 0.0])), [-1.0, 0.0], atol=1e-12)

    def test_linear_field_points_at_regularized_root(self, rank_deficient_linear):
        p = rank_deficient_linear
        eps = 1e-2
        rhs = flow_field(p, eps)
        root = solve_regularized(p, eps)
        rng = np.random.default_rng(3)
        for _ in range(5):
            u = rng.standard_normal(p.dim)
            assert norm(rhs(u) + (u - root.v)) <= 1e-10 * (1 + norm(u))

    def test_equilibrium_at_regularized_root(self, all_problems):
        for p in all_problems:
            eps = 1e-2
            root = solve_regularized(p, eps)
            rhs = flow_field(p, eps)
            tol = 10.0 * default_newton_tol(p.data) / eps
            assert norm(rhs(root.v)) <= tol


class TestIntegrateFlow:
    def test_pure_decay_hits_half_at_ln2(self):
        p = identity_problem(2)
        traj = integrate_flow(p, 1.0, math.log(2.0), u0=[1.0, 0.0])
        np.testing.assert_allclose(traj.states[-1], [0.5, 0.0], atol=1e-6)

    def test_linear_flow_closed_form(self, hilbert_linear):
        p = hilbert_linear
        eps = 1e-2
        rtol = 1e-8
        root = solve_regularized(p, eps)
        traj = integrate_flow(p, eps, 3.0, rtol=rtol)
        u0 = np.zeros(p.dim)
        for t, u in zip(traj.times, traj.states):
            expected = root.v + math.exp(-t) * (u0 - root.v)
            assert norm(u - expected) <= 10 * rtol * norm(u0 - root.v)

    def test_residual_halves_at_ln2(self, all_problems):
        for p in all_problems:
            traj = integrate_flow(p, 1e-2, math.log(2.0), checkpoints=1)
            g0 = traj.residuals[0]
            assert traj.residuals[-1] == pytest.approx(g0 / 2, rel=1e-3)

    def test_residual_decay_law_on_corpus(self, all_problems):
        for p in all_problems:
            traj = integrate_flow(p, 1e-2, 5.0)
            model = traj.residuals[0] * np.exp(-traj.times)
            assert np.max(np.abs(traj.residuals / model - 1.0)) <= 1e-3

    def test_distance_to_root_bound(self, all_problems):
        for p in all_problems:
            eps = 1e-2
            traj = integrate_flow(p, eps, 5.0)
            root = solve_regularized(p, eps)
            g0 = traj.residuals[0]
            for t, u in zip(traj.times, traj.states):
                assert norm(u - root.v) <= 1.05 * g0 * math.exp(-t) / eps

    def test_tightening_tolerances_tightens_decay(self, cubic):
        def worst_dev(rtol, atol):
            traj = integrate_flow(cubic, 1e-2, 5.0, rtol=rtol, atol=atol)
            model = traj.residuals[0] * np.exp(-traj.times)
            return np.max(np.abs(traj.residuals / model - 1.0))

        loose = worst_dev(1e-6, 1e-8)
        tight = worst_dev(1e-7, 1e-9)
        assert tight <= loose / 2

    def test_checkpoint_grid(self, cubic):
        traj = integrate_flow(cubic, 1e-1, 2.0, checkpoints=4)
        np.testing.assert_allclose(traj.times, np.linspace(0.0, 2.0, 5), atol=0.0)
        assert traj.states.shape == (5, cubic.dim)
        assert traj.accepted > 0

    def test_recorded_residuals_recomputed_from_operator(self, cubic):
        traj = integrate_flow(cubic, 1e-1, 1.0, checkpoints=2)
        for u, g in zip(traj.states, traj.residuals):
            assert g == pytest.approx(
                residual_value(cubic, 1e-1, u), rel=1e-12, abs=1e-300
            )

    def test_invalid_arguments(self, cubic):
        with pytest.raises(ValueError):
            integrate_flow(cubic, 1e-2, 0.0)
        with pytest.raises(ValueError):
            integrate_flow(cubic, 1e-2, 1.0, checkpoints=0)
        with pytest.raises(ValueError):
            integrate_flow(cubic, 1e-2, 1.0, rtol=0.0)
        with pytest.raises(ValueError):
            integrate_flow(cubic, 0.0, 1.0)

    def test_impossible_tolerance_fails_numerically(self, cubic):
        with pytest.raises(NumericalFailure):
            integrate_flow(cubic, 1e-2, 1.0, rtol=1e-300, atol=1e-320)


class TestSolveToStopping:
    def test_final_state_near_regularized_root(self, rank_deficient_linear, cubic):
        for p in (rank_deficient_linear, cubic):
            for eps in (1e-1, 1e-2, 1e-3):
                res = solve_to_stopping(p, eps)
                root = solve_regularized(p, eps)
                g0 = res.trajectory.residuals[0]
                assert norm(res.u_final - root.v) <= 1.05 * g0 * eps

    def test_error_to_limit_decreases_down_the_grid(self, rank_deficient_linear):
        p = rank_deficient_linear
        y = minimal_norm_solution(p)
        errs = [
            norm(solve_to_stopping(p, eps).u_final - y)
            for eps in (1e-1, 1e-2, 1e-3)
        ]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_start_at_limit_stays_near_limit(self, cubic):
        y = minimal_norm_solution(cubic)
        eps = 1e-3
        res = solve_to_stopping(cubic, eps, u0=y)
        g0 = res.trajectory.residuals[0]
        assert norm(res.u_final - y) <= 2 * eps * norm(y) + g0 * eps

    def test_epsilon_must_sit_inside_unit_interval(self, cubic):
        with pytest.raises(ValueError):
            solve_to_stopping(cubic, 1.0)


class TestSolveNoisyToStopping:
    def test_epsilon_from_noise_exponent(self, rank_deficient_linear):
        p = rank_deficient_linear
        delta = 1e-4
        f_noisy = add_noise(p.data, delta, seed=5)
        res = solve_noisy_to_stopping(p, f_noisy, delta, 0.5)
        assert res.epsilon_used == pytest.approx(1e-2, rel=1e-12)
        assert res.trajectory.times[-1] == pytest.approx(
            -2.0 * math.log(1e-2), rel=1e-12
        )

    def test_final_state_near_noisy_root(self, rank_deficient_linear, cubic):
        for k, p in enumerate((rank_deficient_linear, cubic)):
            delta = 1e-3
            f_noisy = add_noise(p.data, delta, seed=11 + k)
            res = solve_noisy_to_stopping(p, f_noisy, delta, 0.5)
            eps = res.epsilon_used
            w = solve_regularized(p, eps, f_override=f_noisy)
            g0 = res.trajectory.residuals[0]
            assert norm(res.w_final - w.v) <= 1.05 * g0 * eps

    def test_zero_noise_matches_clean_run(self, cubic):
        delta = 1e-2
        res_noisy = solve_noisy_to_stopping(cubic, cubic.data, delta, 0.5)
        res_clean = solve_to_stopping(cubic, delta**0.5)
        assert norm(res_noisy.w_final - res_clean.u_final) <= 1e-7 * (
            1 + norm(res_clean.u_final)
        )

    def test_parameter_validation(self, cubic):
        f = cubic.data
        with pytest.raises(ValueError):
            solve_noisy_to_stopping(cubic, f, 0.0, 0.5)
        with pytest.raises(ValueError):
            solve_noisy_to_stopping(cubic, f, 1.5, 0.5)
        with pytest.raises(ValueError):
            solve_noisy_to_stopping(cubic, f, 1e-2, 0.0)
        with pytest.raises(ValueError):
            solve_noisy_to_stopping(cubic, f, 1e-2, 1.0)
