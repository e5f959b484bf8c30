"""Measurement strategies: how the next (theta, tau) is chosen from the
current A-vector.

MOAAAR measures at a constant cap angle whose sign tracks sign(zeta), with
tau = theta_cap / K.  Greedy maximizes a one-step objective over
(theta, tau) by grid search with local refinement.  Two baselines complete
the set: a non-adaptive periodic scheme (no sign feedback) and no control
at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .bayes import MeasurementSetting, SufficientStats, bayes_map, stats, wrap_angle
from .telegraph import NoiseParams, char_matrix

__all__ = [
    "StrategyKind",
    "GreedySearch",
    "StrategyConfig",
    "next_setting_moaaar",
    "next_setting_greedy",
    "greedy_objective",
    "one_step_loss",
    "next_setting",
]


class StrategyKind(Enum):
    NO_CONTROL = "nocontrol"
    NON_ADAPTIVE_PERIODIC = "periodic"
    GREEDY = "greedy"
    MOAAAR = "moaaar"
    MOAAAR_GENERAL = "moaaar-general"


@dataclass(frozen=True)
class GreedySearch:
    """Grid-search options for the greedy policy.

    The coarse grid covers theta in (-pi, pi] and u = tau K in (0, pi];
    zooming refines the maximizer until both spacings fall below tol, and
    the result is reported on the tol lattice.
    """

    n_theta: int = 48
    n_u: int = 40
    tol: float = 1e-4

    def __post_init__(self):
        if self.n_theta < 8 or self.n_u < 8:
            raise ValueError("grid too coarse to refine reliably")
        if not 0 < self.tol <= 1e-2:
            raise ValueError("tol must be in (0, 1e-2]")


@dataclass(frozen=True)
class StrategyConfig:
    kind: StrategyKind
    theta_cap: float | None = None
    tau_override: float | None = None
    greedy_search: GreedySearch = field(default_factory=GreedySearch)

    def __post_init__(self):
        needs_cap = (
            StrategyKind.MOAAAR,
            StrategyKind.MOAAAR_GENERAL,
            StrategyKind.NON_ADAPTIVE_PERIODIC,
        )
        if self.kind in needs_cap:
            if self.theta_cap is None or not 0 < self.theta_cap <= math.pi:
                raise ValueError(f"{self.kind.value} needs theta_cap in (0, pi]")
        if self.kind is StrategyKind.MOAAAR_GENERAL:
            if self.tau_override is None or self.tau_override <= 0:
                raise ValueError("moaaar-general needs tau_override > 0")
        elif self.tau_override is not None:
            raise ValueError("tau_override is only meaningful for moaaar-general")


def _sign(zeta: float) -> float:
    # tie-break: sign(0) := +1
    return 1.0 if zeta >= 0.0 else -1.0


def next_setting_moaaar(
    st: SufficientStats, theta_cap: float, params: NoiseParams
) -> MeasurementSetting:
    """Constant-angle policy: theta = sign(zeta) theta_cap, tau = theta_cap / K."""
    s = _sign(st.zeta)
    return MeasurementSetting(theta=s * theta_cap, tau=theta_cap / params.big_k)


def _resolution_grid(
    p: np.ndarray, thetas: np.ndarray, us: np.ndarray, params: NoiseParams
) -> np.ndarray:
    """Expected post-measurement sign resolution on a (theta, u) grid.

    For each candidate, propagate the current sign distribution p through
    both outcome maps at zero data-qubit coupling and sum the absolute
    posterior imbalances |(F^y p)_+ - (F^y p)_-|.  This is the expected
    magnitude of zeta after the measurement, the record's power to resolve
    the telegraph sign.  Row-difference algebra collapses it to two scalars
    per tau, making the grid cheap.
    """
    K = params.big_k
    m0 = np.empty(len(us))
    mm = np.empty(len(us), dtype=complex)
    for i, u in enumerate(us):
        tau = u / K
        M0 = char_matrix(0.0, tau, params).real
        Mm = char_matrix(-K, tau, params)
        m0[i] = (M0[0] - M0[1]) @ p
        mm[i] = (Mm[0] - Mm[1]) @ p
    g = (np.exp(1j * thetas)[:, None] * mm[None, :]).real
    return np.abs(0.5 * m0[None, :] + 0.5 * g) + np.abs(0.5 * m0[None, :] - 0.5 * g)


def greedy_objective(
    a: np.ndarray, theta: float, tau: float, params: NoiseParams
) -> float:
    """One-step objective the greedy policy maximizes, at a single (theta, tau).

    Scale invariant in a; see _resolution_grid for the definition.
    """
    p = np.abs(np.asarray(a, dtype=complex))
    tot = p.sum()
    if tot == 0.0:
        raise ValueError("degenerate A-vector")
    u = tau * params.big_k
    return float(
        _resolution_grid(p / tot, np.array([theta]), np.array([u]), params)[0, 0]
    )


def next_setting_greedy(
    a: np.ndarray, params: NoiseParams, search: GreedySearch | None = None
) -> MeasurementSetting:
    """Maximize the one-step objective over theta in (-pi, pi], tau K in (0, pi].

    Coarse grid, then repeated 9x9 zooms around the incumbent until both
    spacings are below tol; the maximizer is snapped to the tol lattice.
    Ties break toward smaller tau, then smaller |theta|, then theta > 0.
    The objective is pi-periodic in theta, so of the two equivalent angles
    the one aligned with the currently more likely sign is returned (the
    null outcome then confirms the likely state), which also makes
    sign(theta) follow sign(zeta).
    """
    if search is None:
        search = GreedySearch()
    p = np.abs(np.asarray(a, dtype=complex))
    tot = p.sum()
    if tot == 0.0:
        raise ValueError("degenerate A-vector")
    p = p / tot
    K = params.big_k
    tol = search.tol
    th = np.linspace(-np.pi, np.pi, search.n_theta, endpoint=False) + 2 * np.pi / search.n_theta
    uu = np.linspace(np.pi / search.n_u, np.pi, search.n_u)
    dth, du = th[1] - th[0], uu[1] - uu[0]
    while True:
        J = _resolution_grid(p, th, uu, params)
        cand = np.argwhere(J >= J.max() - 1e-15)
        it, iu = min(cand, key=lambda ij: (uu[ij[1]], abs(th[ij[0]]), th[ij[0]] < 0))
        t0, u0 = th[it], uu[iu]
        if dth < 0.5 * tol and du < 0.5 * tol:
            break
        th = np.linspace(t0 - dth, t0 + dth, 9)
        uu = np.clip(np.linspace(u0 - du, u0 + du, 9), tol, np.pi)
        dth, du = th[1] - th[0], uu[1] - uu[0]
    theta_q = round(t0 / tol) * tol
    u_q = round(u0 / tol) * tol
    s = _sign(float(p[0] - p[1]))
    if abs(wrap_angle(theta_q - s * u_q)) > 0.5 * np.pi:
        theta_q = wrap_angle(theta_q + np.pi)
    return MeasurementSetting(theta=float(theta_q), tau=float(u_q / K))


def one_step_loss(
    a: np.ndarray, setting: MeasurementSetting, params: NoiseParams
) -> float:
    """Relative coherence lost by one wait-and-measure step.

    delta = 1 - sum_y |1^T F(theta, tau, y) a| / |1^T a|.  Nonnegative for
    A-vectors reachable from the stationary prior (dephasing plus the
    triangle inequality); an arbitrarily misaligned pair can realign under
    evolution and make delta negative.
    """
    av = np.asarray(a, dtype=complex)
    denom = abs(av[0] + av[1])
    if denom == 0.0:
        raise ValueError("zero-coherence A-vector")
    total = 0.0
    for y in (0, 1):
        b = bayes_map(setting, y, params) @ av
        total += abs(b[0] + b[1])
    return 1.0 - total / denom


def next_setting(
    config: StrategyConfig, a: np.ndarray, params: NoiseParams
) -> MeasurementSetting | None:
    """Strategy dispatch; returns None when the strategy never measures."""
    kind = config.kind
    if kind is StrategyKind.NO_CONTROL:
        return None
    if kind is StrategyKind.NON_ADAPTIVE_PERIODIC:
        return MeasurementSetting(config.theta_cap, config.theta_cap / params.big_k)
    if kind is StrategyKind.MOAAAR:
        return next_setting_moaaar(stats(a, params), config.theta_cap, params)
    if kind is StrategyKind.MOAAAR_GENERAL:
        s = _sign(stats(a, params).zeta)
        return MeasurementSetting(s * config.theta_cap, config.tau_override)
    if kind is StrategyKind.GREEDY:
        return next_setting_greedy(a, params, config.greedy_search)
    raise ValueError(f"unknown strategy kind {kind!r}")
