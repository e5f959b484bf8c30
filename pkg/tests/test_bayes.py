"""Bayesian filter: likelihood, transfer maps against the trajectory oracle,
A-vector statistics, and the information/coherence inequalities."""

import numpy as np
import pytest

from sqcontrol import (
    MeasurementSetting,
    NoiseParams,
    apply_map,
    bayes_map,
    char_matrix,
    control_and_coherence,
    free_evolve,
    likelihood,
    stationary_avector,
    stats,
    wrap_angle,
)
from oracle_utils import mc_bayes_column


class TestLikelihood:
    def test_aligned(self):
        assert likelihood(0, 1.2, 0.06, 20.0) == pytest.approx(1.0)
        assert likelihood(1, 1.2, 0.06, 20.0) == pytest.approx(0.0)

    def test_orthogonal(self):
        x = 0.02
        theta = 20.0 * x + np.pi / 2
        assert likelihood(0, theta, x, 20.0) == pytest.approx(0.5)

    def test_outcomes_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            theta, x = rng.uniform(-np.pi, np.pi), rng.uniform(-0.5, 0.5)
            p0 = likelihood(0, theta, x, 20.0)
            p1 = likelihood(1, theta, x, 20.0)
            assert 0.0 <= p0 <= 1.0
            assert p0 + p1 == pytest.approx(1.0)
        with pytest.raises(ValueError):
            likelihood(2, 0.0, 0.0, 20.0)


class TestMeasurementSetting:
    def test_theta_wrapped(self):
        assert MeasurementSetting(3 * np.pi, 0.1).theta == pytest.approx(np.pi)
        assert MeasurementSetting(-np.pi, 0.1).theta == pytest.approx(np.pi)
        assert MeasurementSetting(0.3 - 2 * np.pi, 0.1).theta == pytest.approx(0.3)

    def test_tau_positive(self):
        with pytest.raises(ValueError):
            MeasurementSetting(0.3, 0.0)

    def test_wrap_angle_range(self):
        for th in np.linspace(-20, 20, 101):
            w = wrap_angle(th)
            assert -np.pi < w <= np.pi
            assert np.cos(w - th) == pytest.approx(1.0)


class TestBayesMap:
    def test_completeness(self, fig1_params):
        rng = np.random.default_rng(2)
        for _ in range(20):
            setting = MeasurementSetting(rng.uniform(-np.pi, np.pi), rng.uniform(0.01, 0.4))
            total = bayes_map(setting, 0, fig1_params) + bayes_map(setting, 1, fig1_params)
            m = char_matrix(fig1_params.kappa, setting.tau, fig1_params)
            assert np.abs(total - m).max() < 1e-12

    def test_probability_conservation_at_kappa_zero(self, fig1_params):
        rng = np.random.default_rng(3)
        for _ in range(20):
            setting = MeasurementSetting(rng.uniform(-np.pi, np.pi), rng.uniform(0.01, 0.4))
            prob = rng.dirichlet([1.0, 1.0])
            total = sum(
                (bayes_map(setting, y, fig1_params, kappa=0.0) @ prob).sum()
                for y in (0, 1)
            )
            assert abs(total - 1.0) < 1e-12

    def test_mandatory_oracle_point(self):
        """The re-derived map must match the trajectory estimator entrywise.

        This is the gate on which every downstream module depends: the map
        is checked at the standard regime point against >= 1e6 sampled
        trajectories per initial sign.
        """
        gu = gd = 1.0
        kappa, big_k = 0.2, 20.0
        theta, tau, y = 1.5, 0.075, 0
        p = NoiseParams(gu, gd, kappa, big_k)
        f = bayes_map(MeasurementSetting(theta, tau), y, p)
        rng = np.random.default_rng(11)
        for col, z0 in enumerate((1, -1)):
            est, se = mc_bayes_column(
                10**6, theta, tau, y, kappa, big_k, gu, gd, z0, rng
            )
            for row in range(2):
                assert abs(f[row, col] - est[row]) < 3 * se[row] + 1e-12

    def test_kappa_override_default(self, fig1_params):
        setting = MeasurementSetting(1.0, 0.05)
        assert np.allclose(
            bayes_map(setting, 0, fig1_params),
            bayes_map(setting, 0, fig1_params, kappa=fig1_params.kappa),
        )
        with pytest.raises(ValueError):
            bayes_map(setting, 3, fig1_params)


class TestApplyAndEvolve:
    def test_identity(self, fig1_params):
        a = stationary_avector(fig1_params)
        assert np.allclose(apply_map(np.eye(2), a), a)

    def test_chain_associativity(self, fig1_params):
        rng = np.random.default_rng(4)
        a = stationary_avector(fig1_params)
        maps = [
            bayes_map(
                MeasurementSetting(rng.uniform(-np.pi, np.pi), rng.uniform(0.02, 0.2)),
                int(rng.integers(0, 2)),
                fig1_params,
            )
            for _ in range(6)
        ]
        chained = a
        for m in maps:
            chained = apply_map(m, chained)
        product = np.eye(2, dtype=complex)
        for m in maps:
            product = m @ product
        assert np.abs(chained - apply_map(product, a)).max() < 1e-12

    def test_measurement_never_hurts_expected_coherence(self, fig1_params):
        rng = np.random.default_rng(5)
        for _ in range(20):
            setting = MeasurementSetting(rng.uniform(-np.pi, np.pi), rng.uniform(0.01, 0.3))
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            kept = sum(
                control_and_coherence(apply_map(bayes_map(setting, y, fig1_params), a)).coherence
                for y in (0, 1)
            )
            evolved = control_and_coherence(
                free_evolve(a, setting.tau, fig1_params)
            ).coherence
            assert kept >= evolved - 1e-12

    def test_free_evolve(self, fig1_params):
        a = np.array([0.3 + 0.1j, 0.6 - 0.2j])
        assert np.allclose(free_evolve(a, 0.0, fig1_params), a)
        theta = 0.7
        total = sum(
            apply_map(bayes_map(MeasurementSetting(theta, 0.2), y, fig1_params), a)
            for y in (0, 1)
        )
        assert np.abs(total - free_evolve(a, 0.2, fig1_params)).max() < 1e-12

    def test_dephasing_contracts_equal_entries(self, fig1_params):
        a = np.array([0.5, 0.5], dtype=complex)
        base = control_and_coherence(a).coherence
        for tau in np.linspace(0.05, 3.0, 12):
            out = control_and_coherence(free_evolve(a, tau, fig1_params)).coherence
            assert out <= base + 1e-12

    def test_deleting_a_measurement_never_helps(self, fig1_params):
        """Total reward with a measurement >= reward with it replaced by
        free evolution, for every fixed schedule enumerated to depth 5."""
        settings = [
            MeasurementSetting(th, 0.08)
            for th in (1.5, -1.5, 1.2, -0.9, 1.5)
        ]

        def reward(maps_per_step):
            total = 0.0
            stack = [(stationary_avector(fig1_params), 0)]
            while stack:
                a, depth = stack.pop()
                if depth == len(maps_per_step):
                    total += control_and_coherence(a).coherence
                    continue
                for m in maps_per_step[depth]:
                    stack.append((m @ a, depth + 1))
            return total

        full = [
            [bayes_map(s, 0, fig1_params), bayes_map(s, 1, fig1_params)]
            for s in settings
        ]
        with_all = reward(full)
        for drop in range(len(settings)):
            maps = list(full)
            maps[drop] = [char_matrix(fig1_params.kappa, settings[drop].tau, fig1_params)]
            assert with_all >= reward(maps) - 1e-12


class TestStats:
    def test_symmetric_start(self, fig1_params):
        st = stats(stationary_avector(fig1_params), fig1_params)
        assert st == (0.0, 0.0, True)

    def test_single_component_flagged(self, fig1_params):
        st = stats(np.array([0.4 + 0.0j, 0.0j]), fig1_params)
        assert st.zeta == pytest.approx(1.0)
        assert not st.alpha_defined
        assert st.alpha == 0.0
        st = stats(np.array([0.0j, 0.0j]), fig1_params)
        assert not st.alpha_defined

    def test_alpha_unit(self, fig1_params):
        a = np.array([0.5 * np.exp(1j * fig1_params.kappa / fig1_params.big_k), 0.5])
        st = stats(a, fig1_params)
        assert st.alpha == pytest.approx(1.0)
        assert st.zeta == pytest.approx(0.0)

    def test_scale_invariance(self, fig1_params):
        rng = np.random.default_rng(6)
        for _ in range(20):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            c = rng.normal() + 1j * rng.normal()
            if abs(c) < 1e-3:
                continue
            s1, s2 = stats(a, fig1_params), stats(c * a, fig1_params)
            assert s1.alpha == pytest.approx(s2.alpha, abs=1e-9)
            assert s1.zeta == pytest.approx(s2.zeta, abs=1e-12)

    def test_zeta_range(self, fig1_params):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            assert -1.0 <= stats(a, fig1_params).zeta <= 1.0


class TestControlPhase:
    def test_examples(self, fig1_params):
        assert control_and_coherence(np.array([0.5, 0.5])) == (0.0, 1.0, True)
        res = control_and_coherence(np.array([0.5j, 0.0j]))
        assert res.phase == pytest.approx(np.pi / 2)
        assert res.coherence == pytest.approx(0.5)
        for rates in ((1.0, 1.0), (3.0, 1.0), (0.4, 2.2)):
            p = NoiseParams(rates[0], rates[1], 0.2, 20.0)
            assert control_and_coherence(stationary_avector(p)).coherence == pytest.approx(1.0)

    def test_degenerate_flagged(self):
        res = control_and_coherence(np.array([0.5, -0.5]))
        assert res.coherence == 0.0
        assert not res.defined
