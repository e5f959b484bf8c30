"""Fixed points, the ergodic decay rate and its deep-regime limit, the
asymptotic cost curve, no-control coherence, and slope-fit rate extraction."""

import numpy as np
import pytest

from sqcontrol import (
    DegenerateDominanceError,
    MeasurementSetting,
    NoiseParams,
    Schedule,
    StrategyConfig,
    StrategyKind,
    bayes_map,
    ergodic_rate,
    fit_rate,
    fixed_point,
    h_theta,
    nc_coherence,
    nc_rate,
    null_fixed_points,
    optimize_theta,
    run_exact_tree,
    scale_rate,
)
from conftest import H_STAR, THETA_STAR
from oracle_utils import sample_paths


class TestFixedPoint:
    def test_identity_degenerate(self):
        with pytest.raises(DegenerateDominanceError):
            fixed_point(np.eye(2))

    def test_diagonal(self):
        v, lam = fixed_point(np.diag([0.9, 0.5]))
        assert np.allclose(v, [1.0, 0.0])
        assert lam == pytest.approx(0.9)

    def test_matches_power_iteration(self, fig1_params):
        """Closed eigendecomposition against straight power iteration."""
        tau = THETA_STAR / fig1_params.big_k
        f0 = bayes_map(MeasurementSetting(THETA_STAR, tau), 0, fig1_params)
        v, lam = fixed_point(f0)

        w = np.array([0.5, 0.5], dtype=complex)
        for _ in range(400):
            w = f0 @ w
            w = w / (abs(w[0]) + abs(w[1]))
        w = w * np.exp(-1j * np.angle(w[0] + w[1]))
        assert np.abs(v - w).max() < 1e-10
        assert np.abs(f0 @ v - lam * v).max() < 1e-10
        assert abs(lam) <= 1.0 + 1e-12

    def test_scale_invariance(self, fig1_params):
        tau = 0.08
        f0 = bayes_map(MeasurementSetting(1.2, tau), 0, fig1_params)
        v1, l1 = fixed_point(f0)
        v2, l2 = fixed_point((0.3 - 2.1j) * f0)
        assert np.abs(v1 - v2).max() < 1e-12
        assert l2 / l1 == pytest.approx(0.3 - 2.1j)

    def test_pair_normalization(self, fig1_params):
        fp = null_fixed_points(THETA_STAR, fig1_params)
        for e in (fp.e_plus, fp.e_minus):
            assert abs(e[0]) + abs(e[1]) == pytest.approx(1.0)
            s = e[0] + e[1]
            assert abs(np.angle(s)) < 1e-12
        for lam in fp.eigenvalues:
            assert abs(lam) <= 1.0 + 1e-12

    def test_pair_mirrors_under_symmetric_rates(self, fig1_params):
        fp = null_fixed_points(THETA_STAR, fig1_params)
        assert np.abs(fp.e_plus - np.conj(fp.e_minus[::-1])).max() < 1e-10


class TestErgodicRate:
    def test_deep_regime_reaches_optimum(self):
        p = NoiseParams(1.0, 1.0, 1e-3, 1e3)
        scaled = scale_rate(ergodic_rate(THETA_STAR, p), p)
        assert abs(scaled - H_STAR) / H_STAR < 0.02

    def test_deep_regime_half_pi(self):
        p = NoiseParams(1.0, 1.0, 1e-3, 1e3)
        scaled = scale_rate(ergodic_rate(np.pi / 2, p), p)
        assert abs(scaled - 1.290) / 1.290 < 0.02

    def test_moderate_regime_near_asymptote(self, fig1_params):
        rate = ergodic_rate(THETA_STAR, fig1_params)
        asym = H_STAR * fig1_params.gamma_breve * fig1_params.kappa**2 / (
            2.0 * fig1_params.big_k**2
        )
        assert asym == pytest.approx(6.27e-5, rel=1e-2)
        assert abs(rate - asym) / asym < 0.15

    def test_convergence_is_monotone_in_regime_depth(self):
        """Scaled rate approaches the asymptotic cost from the moderate
        regime inward, for several cap angles."""
        regimes = [
            NoiseParams(1.0, 1.0, 1e-2, 1e2),
            NoiseParams(1.0, 1.0, 1e-3, 1e3),
            NoiseParams(1.0, 1.0, 1e-4, 1e4),
        ]
        for theta in (1.0, 1.3, THETA_STAR, np.pi / 2):
            target = h_theta(theta)
            gaps = [
                abs(scale_rate(ergodic_rate(theta, p), p) - target)
                for p in regimes
            ]
            assert gaps[0] > gaps[1] > gaps[2]

    def test_validation(self, fig1_params):
        with pytest.raises(ValueError):
            ergodic_rate(0.0, fig1_params)
        with pytest.raises(ValueError):
            ergodic_rate(3.5, fig1_params)

    def test_free_tau_default(self, fig1_params):
        explicit = ergodic_rate(
            THETA_STAR, fig1_params, tau=THETA_STAR / fig1_params.big_k
        )
        assert ergodic_rate(THETA_STAR, fig1_params) == pytest.approx(
            explicit, rel=1e-12
        )


class TestCostCurve:
    def test_half_pi_value(self):
        assert h_theta(np.pi / 2) == pytest.approx(np.pi**2 / 3 - 2, abs=1e-14)
        assert h_theta(np.pi / 2) == pytest.approx(1.2898681, abs=1e-7)

    def test_optimum_value(self):
        assert h_theta(1.50055) == pytest.approx(1.254, abs=1e-3)

    def test_divergence_at_origin(self):
        assert h_theta(0.01) > 1e4

    def test_domain(self):
        for bad in (0.0, np.pi, -0.2, 4.0):
            with pytest.raises(ValueError):
                h_theta(bad)

    def test_minimizer(self):
        theta_star, h_star = optimize_theta()
        assert theta_star == pytest.approx(1.50055, abs=1e-3)
        assert h_star == pytest.approx(1.254, abs=1e-3)
        assert h_theta(theta_star + 0.01) > h_star
        assert h_theta(theta_star - 0.01) > h_star

    def test_stationary_at_minimum(self):
        theta_star, _ = optimize_theta()
        step = 1e-4
        deriv = (h_theta(theta_star + step) - h_theta(theta_star - step)) / (2 * step)
        assert abs(deriv) < 1e-4


class TestNoControl:
    def test_initial_value(self, fig1_params):
        assert nc_coherence(0.0, fig1_params) == pytest.approx(1.0)
        with pytest.raises(ValueError):
            nc_coherence(-0.1, fig1_params)

    def test_non_increasing(self, fig1_params):
        ts = np.linspace(0.0, 25.0, 200)
        cs = [nc_coherence(t, fig1_params) for t in ts]
        assert all(b <= a + 1e-12 for a, b in zip(cs, cs[1:]))

    def test_tail_slope_is_nc_rate(self, fig1_params):
        assert nc_rate(fig1_params) == pytest.approx(0.02)
        ts = np.linspace(10.0, 20.0, 21)
        slope = np.polyfit(
            ts, [-np.log(nc_coherence(t, fig1_params)) for t in ts], 1
        )[0]
        # the exact tail rate is the dominant eigenvalue; the quadratic
        # small-coupling formula sits kappa^2/(4 gamma_bar^2) = 1.02% above
        # it at these parameters, so the comparison tolerance must clear that
        exact = fig1_params.gamma_bar - np.sqrt(
            fig1_params.gamma_bar**2 - fig1_params.kappa**2
        )
        assert abs(slope - exact) / exact < 1e-6
        assert abs(slope - 0.02) / 0.02 < 0.0105

    def test_against_trajectory_oracle(self, fig1_params):
        """|mean phasor| over 1e6 sampled telegraph paths at t=5."""
        t = 5.0
        n = 10**6
        rng = np.random.default_rng(12)
        p_up = fig1_params.gamma_up / (2.0 * fig1_params.gamma_bar)
        z0 = np.where(rng.random(n) < p_up, 1, -1)
        x, _ = sample_paths(
            n, t, fig1_params.gamma_up, fig1_params.gamma_down, z0, rng
        )
        ph = np.exp(1j * fig1_params.kappa * x)
        est = np.mean(ph)
        se = np.std(ph) / np.sqrt(len(ph))
        assert abs(nc_coherence(t, fig1_params) - abs(est)) < 3 * abs(se) + 1e-12


class TestFitRate:
    def test_synthetic_exponential(self, fig1_params):
        ts = np.linspace(5.0, 15.0, 21)
        series = [(t, np.exp(-0.02 * t)) for t in ts]
        res = fit_rate(series, fig1_params)
        assert res.rate == pytest.approx(0.02, abs=1e-12)
        assert res.residual < 1e-12
        assert not res.flagged
        assert res.scaled_rate == pytest.approx(
            scale_rate(0.02, fig1_params), rel=1e-12
        )

    def test_default_window_skips_transient(self, fig1_params):
        ts = np.linspace(0.0, 20.0, 41)
        series = [(t, nc_coherence(t, fig1_params)) for t in ts]
        res = fit_rate(series, fig1_params)
        assert res.window[0] == pytest.approx(5.0 / fig1_params.gamma_breve)
        assert abs(res.rate - 0.02) / 0.02 < 0.0105
        assert not res.flagged

    def test_validation(self, fig1_params):
        with pytest.raises(ValueError):
            fit_rate([(1.0, 0.5), (2.0, 0.0)], fig1_params)
        with pytest.raises(ValueError):
            fit_rate(
                [(t, 0.9) for t in (1.0, 2.0, 3.0, 4.0)],
                fig1_params,
                window=(0.0, 5.0),
            )

    def test_noisy_series_flagged(self, fig1_params):
        rng = np.random.default_rng(13)
        ts = np.linspace(5.0, 15.0, 21)
        series = [
            (t, float(np.exp(-0.02 * t) * np.exp(rng.normal(0, 0.05)))) for t in ts
        ]
        assert fit_rate(series, fig1_params, residual_threshold=1e-3).flagged

    def test_feedback_tree_window(self, fig1_params):
        """Scaled rate of the constant-angle policy on the window [2, 3]
        sits between the no-control-normalized floor and the half-pi cost."""
        sched = Schedule(
            horizon=3.0,
            strategy=StrategyConfig(kind=StrategyKind.MOAAAR, theta_cap=THETA_STAR),
            params=fig1_params,
        )
        grid = np.linspace(2.0, 3.0, 11)
        rows = run_exact_tree(sched, 1e-9, grid)
        res = fit_rate(
            [(t, c) for t, c, _ in rows], fig1_params, window=(2.0, 3.0)
        )
        assert 1.1 <= res.scaled_rate <= 1.6
        assert not res.flagged
