"""Convergence-bound lab: descent recursion, interference constants, bounds."""

import json
import math

import numpy as np
import pytest

from inrpack.convergence import (
    ConfigError,
    ConvergenceConfig,
    QuadraticLoss,
    config_from_json,
    config_to_json,
    gamma3_cap,
    interference_combined,
    interference_primary,
    measure_trajectory,
    primary_bound_rhs,
    reference_config,
    run_gd,
    secondary_bound_rhs,
    verify,
)


def make_config(curvatures, minimizers, gamma, alpha3, inits=None, iterations=300,
                offsets=(0.0, 0.0, 0.0)):
    d = len(curvatures[0])
    inits = inits or (np.zeros(d), np.zeros(d))
    return ConvergenceConfig(
        losses=tuple(
            QuadraticLoss(np.asarray(c, float), np.asarray(m, float), o)
            for c, m, o in zip(curvatures, minimizers, offsets)
        ),
        gamma=np.asarray(gamma, float),
        alpha3=np.asarray(alpha3, float),
        theta1_init=np.asarray(inits[0], float),
        theta2_init=np.asarray(inits[1], float),
        iterations=iterations,
    )


def random_feasible_config(rng, iterations=500):
    """Random config inside the theorem's hypothesis space.

    The PL constant must sit strictly below the smoothness constant, so each
    loss gets d >= 2 with an enforced curvature spread (ratio in [1.3, 3]);
    that also keeps the geometric decay fast enough for 400-iteration tails.
    The third loss weight stays at most 90% of its feasibility cap.
    """
    d = int(rng.integers(2, 5))
    while True:
        curvatures = []
        for _ in range(3):
            lo = rng.uniform(0.4, 1.0)
            hi = lo * rng.uniform(1.3, 3.0)
            mid = rng.uniform(lo, hi, max(0, d - 2))
            curvatures.append(np.concatenate([[lo, hi], mid]))
        minimizers = [rng.uniform(-2, 2, d) for _ in range(3)]
        alpha3 = rng.uniform(0.1, 0.9, 2)
        raw = rng.uniform(0.2, 1.0, 3)
        gamma = raw / raw.sum()
        losses = tuple(QuadraticLoss(c, m) for c, m in zip(curvatures, minimizers))
        cap = gamma3_cap(losses, gamma, alpha3)
        if gamma[2] <= 0.9 * cap:
            inits = (rng.uniform(-1, 1, d), rng.uniform(-1, 1, d))
            return make_config(
                curvatures, minimizers, gamma, alpha3, inits, iterations
            )


class TestQuadraticLoss:
    def test_constants_by_construction(self):
        loss = QuadraticLoss(np.array([0.5, 2.0]), np.array([1.0, -1.0]), offset=0.3)
        assert loss.beta == 2.0
        assert loss.mu == 0.5
        assert loss.value(loss.minimizer) == 0.3
        assert loss.gap(loss.minimizer) == 0.0

    def test_pl_condition_holds(self):
        """|grad|^2 >= 2 mu (L - L*) for arbitrary points."""
        rng = np.random.default_rng(0)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            loss = QuadraticLoss(rng.uniform(0.1, 3.0, d), rng.uniform(-2, 2, d))
            x = rng.uniform(-5, 5, d)
            g = loss.grad(x)
            assert np.dot(g, g) >= 2.0 * loss.mu * loss.gap(x) - 1e-12

    def test_smoothness_holds(self):
        """|grad(x) - grad(y)| <= beta |x - y| for arbitrary pairs."""
        rng = np.random.default_rng(1)
        for _ in range(200):
            d = int(rng.integers(1, 6))
            loss = QuadraticLoss(rng.uniform(0.1, 3.0, d), rng.uniform(-2, 2, d))
            x, y = rng.uniform(-5, 5, (2, d))
            lhs = np.linalg.norm(loss.grad(x) - loss.grad(y))
            assert lhs <= loss.beta * np.linalg.norm(x - y) + 1e-12

    def test_rejects_nonpositive_curvature(self):
        with pytest.raises(ConfigError):
            QuadraticLoss(np.array([0.0, 1.0]), np.zeros(2))


class TestRunGd:
    def test_one_step_exact_on_uniform_curvature(self):
        """With the third loss disconnected and power-of-two constants, the
        prescribed step size 1/(gamma * beta) cancels the curvature exactly
        and the first step lands on the minimizer."""
        config = make_config(
            curvatures=[[1.0, 1.0]] * 3,
            minimizers=[[1.0, -2.0], [0.5, 0.25], [0.0, 0.0]],
            gamma=[0.5, 0.25, 0.25],
            alpha3=[0.0, 0.0],
            iterations=3,
        )
        traj = run_gd(config)
        np.testing.assert_array_equal(traj.theta1[1], [1.0, -2.0])
        np.testing.assert_array_equal(traj.theta2[1], [0.5, 0.25])
        np.testing.assert_array_equal(traj.theta1[3], traj.theta1[1])

    def test_stationary_at_compatible_minimizers(self):
        """Starting at minimizers whose combination is also the third
        minimizer leaves every iterate fixed."""
        m1 = np.array([1.0, 0.0])
        m2 = np.array([0.0, 1.0])
        config = make_config(
            curvatures=[[0.5, 1.0]] * 3,
            minimizers=[m1, m2, 0.5 * m1 + 0.5 * m2],
            gamma=[0.4, 0.4, 0.2],
            alpha3=[0.5, 0.5],
            inits=(m1, m2),
            iterations=10,
        )
        traj = run_gd(config)
        np.testing.assert_array_equal(traj.theta1[-1], m1)
        np.testing.assert_array_equal(traj.theta2[-1], m2)
        np.testing.assert_array_equal(traj.w3[-1], traj.w3[0])

    def test_matches_scalar_loop_oracle(self):
        """Independent re-implementation of the recursion, all loops explicit."""
        config = reference_config(iterations=40)
        traj = run_gd(config)

        l1, l2, l3 = config.losses
        g = config.gamma
        a31, a32 = config.alpha3
        eta1 = 1.0 / (g[0] * l1.beta)
        eta2 = 1.0 / (g[1] * l2.beta)
        th1 = list(config.theta1_init)
        th2 = list(config.theta2_init)
        for _step in range(40):
            w3 = [a31 * th1[k] + a32 * th2[k] for k in range(2)]
            g3 = [l3.curvature[k] * (w3[k] - l3.minimizer[k]) for k in range(2)]
            d1 = [
                g[0] * l1.curvature[k] * (th1[k] - l1.minimizer[k]) + g[2] * a31 * g3[k]
                for k in range(2)
            ]
            d2 = [
                g[1] * l2.curvature[k] * (th2[k] - l2.minimizer[k]) + g[2] * a32 * g3[k]
                for k in range(2)
            ]
            th1 = [th1[k] - eta1 * d1[k] for k in range(2)]
            th2 = [th2[k] - eta2 * d2[k] for k in range(2)]
        np.testing.assert_allclose(traj.theta1[-1], th1, rtol=0, atol=1e-12)
        np.testing.assert_allclose(traj.theta2[-1], th2, rtol=0, atol=1e-12)

    def test_update_splits_into_own_gradient_plus_leakage(self):
        """The realized update direction minus the weighted own gradient is
        exactly the scaled third-loss gradient at the combined point."""
        config = reference_config(iterations=60)
        traj = run_gd(config)
        l1, l3 = config.losses[0], config.losses[2]
        g1, g3 = float(config.gamma[0]), float(config.gamma[2])
        a31 = float(config.alpha3[0])
        eta1 = 1.0 / (g1 * l1.beta)
        for t in range(60):
            realized = (traj.theta1[t] - traj.theta1[t + 1]) / eta1
            leakage = realized - g1 * l1.grad(traj.theta1[t])
            expected = g3 * a31 * l3.grad(traj.w3[t])
            np.testing.assert_allclose(leakage, expected, rtol=0, atol=1e-12)


class TestInterferenceConstants:
    def test_primary_formula(self):
        config = reference_config()
        assert interference_primary(config, 1, g3_sq=2.0) == pytest.approx(
            0.2**2 * 0.5**2 * 2.0, rel=1e-15
        )
        with pytest.raises(ValueError):
            interference_primary(config, 3, 1.0)

    def test_combined_matches_term_by_term_oracle(self):
        config = reference_config(iterations=200)
        traj = run_gd(config)
        stats = measure_trajectory(config, traj)
        l1, l2, l3 = config.losses
        g1, g2, g3 = config.gamma
        a31, a32 = config.alpha3
        r1, r2 = l3.beta / l1.beta, l3.beta / l2.beta
        lam = 1.0 - g3 * (a31**2 * r1 / g1 + a32**2 * r2 / g2)
        expected = (
            lam**2 * stats.g3_sq
            + a31**2 * r1**2 * stats.g1_sq
            + a32**2 * r2**2 * stats.g2_sq
            - 2 * a31 * r1 * lam * stats.rho13
            - 2 * a32 * r2 * lam * stats.rho23
            + 2 * a31 * a32 * r1 * r2 * stats.rho12
        )
        assert interference_combined(config, stats) == pytest.approx(expected, rel=1e-12)

    def test_combined_degenerates_without_mixing(self):
        """alpha3 = 0 removes every cross term, leaving exactly G3^2."""
        config = make_config(
            curvatures=[[0.5, 1.0]] * 3,
            minimizers=[[1, 0], [0, 1], [1, 1]],
            gamma=[0.4, 0.4, 0.2],
            alpha3=[0.0, 0.0],
            iterations=50,
        )
        traj = run_gd(config)
        stats = measure_trajectory(config, traj)
        assert interference_combined(config, stats) == pytest.approx(stats.g3_sq, rel=1e-15)

    def test_symmetric_config_has_equal_cross_terms(self):
        """Identical first/second losses, equal mixing and weights make the
        two similarity cross terms equal."""
        config = make_config(
            curvatures=[[0.5, 1.0]] * 3,
            minimizers=[[1, 1], [1, 1], [2, 0]],
            gamma=[0.4, 0.4, 0.2],
            alpha3=[0.5, 0.5],
            inits=([0.3, -0.2], [0.3, -0.2]),
            iterations=100,
        )
        traj = run_gd(config)
        stats = measure_trajectory(config, traj)
        assert stats.rho13 == pytest.approx(stats.rho23, rel=1e-12)
        assert stats.g1_sq == pytest.approx(stats.g2_sq, rel=1e-12)


class TestBoundRhs:
    def test_zero_iterations_is_initial_gap_exactly(self):
        config = reference_config()
        gap0 = config.losses[0].gap(config.theta1_init)
        assert primary_bound_rhs(config, 0, 1, g3_sq=3.0) == gap0
        traj = run_gd(config, 10)
        stats = measure_trajectory(config, traj)
        gap0_3 = config.losses[2].gap(config.w3_init())
        assert secondary_bound_rhs(config, 0, stats) == gap0_3

    def test_negative_iteration_rejected(self):
        config = reference_config()
        with pytest.raises(ValueError):
            primary_bound_rhs(config, -1, 1, 1.0)
        traj = run_gd(config, 5)
        with pytest.raises(ValueError):
            secondary_bound_rhs(config, -1, measure_trajectory(config, traj))

    def test_large_t_converges_to_asymptotic_gap(self):
        """The geometric series closes to delta / (2 mu gamma^2)."""
        config = reference_config()
        g3_sq = 1.7
        delta = interference_primary(config, 1, g3_sq)
        l1 = config.losses[0]
        g1 = float(config.gamma[0])
        limit = delta / (2.0 * l1.mu * g1 * g1)
        assert primary_bound_rhs(config, 4000, 1, g3_sq) == pytest.approx(limit, abs=1e-6)

    def test_no_interference_decays_geometrically(self):
        """With the interference constant zeroed, the log of the bound falls
        by exactly log(1 - mu/beta) per step."""
        config = reference_config()
        ts = np.arange(0, 60)
        rhs = primary_bound_rhs(config, ts, 1, g3_sq=0.0)
        slopes = np.diff(np.log(rhs))
        expected = math.log(1.0 - 0.5 / 1.0)
        np.testing.assert_allclose(slopes, expected, rtol=0, atol=1e-9)


class TestVerify:
    def test_reference_config_passes_everywhere(self):
        report = verify(reference_config())
        assert report.passed
        assert report.first_violation() is None
        for name in ("primary_1", "primary_2", "combined"):
            assert np.all(report.gaps[name] <= report.bounds[name])

    def test_reference_tail_respects_asymptotic_limits(self):
        report = verify(reference_config())
        for name in ("primary_1", "primary_2", "combined"):
            assert report.tail_gaps[name] <= report.asymptotic_limits[name]

    def test_disconnected_third_image_converges_fast(self):
        """With no mixing the primaries are plain descent on PL quadratics:
        gaps collapse below 1e-12 well before t = 200 and bounds hold."""
        config = make_config(
            curvatures=[[0.5, 1.0]] * 3,
            minimizers=[[1, 0], [0, 1], [1, 1]],
            gamma=[0.45, 0.45, 0.1],
            alpha3=[0.0, 0.0],
            iterations=250,
        )
        report = verify(config)
        assert report.passed
        assert report.gaps["primary_1"][200] < 1e-12
        assert report.gaps["primary_2"][200] < 1e-12

    def test_zero_iterations_trivially_passes(self):
        report = verify(reference_config(), iterations=0)
        assert report.passed
        assert report.iterations == 0

    def test_random_feasible_configs_pass(self):
        rng = np.random.default_rng(2024)
        for _ in range(10):
            report = verify(random_feasible_config(rng, iterations=400))
            assert report.passed, report.first_violation()

    def test_apriori_gradient_bounds_override(self):
        config = reference_config(iterations=100)
        loose = ConvergenceConfig(
            losses=config.losses,
            gamma=config.gamma,
            alpha3=config.alpha3,
            theta1_init=config.theta1_init,
            theta2_init=config.theta2_init,
            iterations=100,
            grad_bound_squares=(50.0, 50.0, 50.0),
        )
        tight = verify(config)
        relaxed = verify(loose)
        assert relaxed.passed
        assert relaxed.deltas["primary_1"] > tight.deltas["primary_1"]

    def test_similarity_trend(self):
        """Moving the third minimizer toward the midpoint of the other two
        shrinks the final combined-loss gap (checked as an overall trend)."""
        far = np.array([2.5, 2.5])
        mid = np.array([0.5, 0.5])
        finals = []
        for s in np.linspace(0.0, 1.0, 6):
            target = (1 - s) * far + s * mid
            config = make_config(
                curvatures=[[0.5, 1.0]] * 3,
                minimizers=[[1, 0], [0, 1], target],
                gamma=[0.4, 0.4, 0.2],
                alpha3=[0.5, 0.5],
                iterations=400,
            )
            finals.append(verify(config).gaps["combined"][-1])
        assert finals[-1] < finals[0]
        # trend, not per-pair: fitted slope over the family is negative
        slope = np.polyfit(np.linspace(0, 1, 6), finals, 1)[0]
        assert slope < 0

    def test_infeasible_gamma3_names_the_inequality(self):
        with pytest.raises(ConfigError, match="gamma3"):
            make_config(
                curvatures=[[1.0, 1.0]] * 3,
                minimizers=[[1, 0], [0, 1], [1, 1]],
                gamma=[0.05, 0.05, 0.9],
                alpha3=[1.0, 1.0],
            )

    def test_report_json_round_trips_through_parser(self):
        report = verify(reference_config(iterations=20))
        payload = json.loads(report.to_json())
        assert payload["passed"] is True
        assert len(payload["gaps"]["combined"]) == 21
        assert set(payload["interference"]) == {"primary_1", "primary_2", "combined"}


class TestConfigJson:
    def test_round_trip(self):
        config = reference_config(iterations=77)
        text = config_to_json(config)
        back = config_from_json(text)
        assert back.iterations == 77
        np.testing.assert_array_equal(back.gamma, config.gamma)
        np.testing.assert_array_equal(back.alpha3, config.alpha3)
        for a, b in zip(back.losses, config.losses):
            np.testing.assert_array_equal(a.curvature, b.curvature)
            np.testing.assert_array_equal(a.minimizer, b.minimizer)

    def test_missing_field_is_config_error(self):
        with pytest.raises(ConfigError):
            config_from_json(json.dumps({"gamma": [0.4, 0.4, 0.2]}))

    def test_grad_bounds_survive(self):
        config = ConvergenceConfig(
            losses=reference_config().losses,
            gamma=np.array([0.4, 0.4, 0.2]),
            alpha3=np.array([0.5, 0.5]),
            theta1_init=np.zeros(2),
            theta2_init=np.zeros(2),
            grad_bound_squares=(1.0, 2.0, 3.0),
        )
        back = config_from_json(config_to_json(config))
        assert back.grad_bound_squares == (1.0, 2.0, 3.0)
