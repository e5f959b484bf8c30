"""Bayesian estimation core: measurement likelihood, complex transfer maps,
the A-vector record state, sufficient statistics, and the final control phase.

A record Y_n = (y_1 .. y_n) of spectator-qubit outcomes is summarized by the
unnormalized complex pair A_n (one component per telegraph sign), with

    A_n = F(theta_n, tau_n, y_n) ... F(theta_1, tau_1, y_1) A_0,

A_0 the stationary telegraph distribution.  |1^T A_n| is the record
probability times the conditional data-qubit coherence, and arg(1^T A_n) is
the control phase that would recover that coherence if the experiment ended
now.  A-vectors are plain length-2 complex ndarrays (index 0 <-> z=+1) and
are never renormalized; the decision statistics (alpha, zeta) are scale free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .telegraph import NoiseParams, char_matrix, steady_state

__all__ = [
    "MeasurementSetting",
    "SufficientStats",
    "ControlPhase",
    "wrap_angle",
    "likelihood",
    "bayes_map",
    "apply_map",
    "free_evolve",
    "stationary_avector",
    "stats",
    "control_and_coherence",
]

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Reduce an angle modulo 2 pi into (-pi, pi]."""
    w = math.fmod(theta + math.pi, TWO_PI)
    if w <= 0.0:
        w += TWO_PI
    return w - math.pi


@dataclass(frozen=True)
class MeasurementSetting:
    """One adaptive step: wait tau, then measure along equatorial angle theta.

    theta is stored wrapped into (-pi, pi]; tau must be positive.
    """

    theta: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


class SufficientStats(NamedTuple):
    """Decision statistics of an A-vector.

    alpha is the scaled phase difference (K/kappa) arg(a_plus / a_minus) on
    the principal branch; zeta the normalized modulus imbalance, the
    conditional mean of the telegraph sign.  alpha_defined is False when a
    component vanishes (alpha then falls back to 0).
    """

    alpha: float
    zeta: float
    alpha_defined: bool = True


class ControlPhase(NamedTuple):
    phase: float
    coherence: float
    defined: bool = True


def likelihood(y: int, theta: float, x: float, big_k: float) -> float:
    """Probability of outcome y given measurement angle theta and noise integral x.

    p(y | theta, x) = |y - cos^2((theta - K x)/2)|; outcomes sum to 1.
    """
    if y not in (0, 1):
        raise ValueError("y must be 0 or 1")
    return abs(y - math.cos(0.5 * (theta - big_k * x)) ** 2)


def bayes_map(
    setting: MeasurementSetting,
    y: int,
    params: NoiseParams,
    kappa: float | None = None,
) -> np.ndarray:
    """Complex 2x2 transfer map F(theta, tau, y) advancing an A-vector one step.

    Entry (z', z) is E[p(y | theta, x) e^{i kappa x} 1{z_tau = z'} | z_0 = z].
    Expanding the likelihood in exponentials gives the closed form

        F = M(kappa)/2 + (1-2y)/4 [e^{i theta} M(kappa - K) + e^{-i theta} M(kappa + K)]

    with M(k) = char_matrix(k, tau).  The two outcome maps sum to
    M(kappa; tau).  kappa overrides the coupling used for phase bookkeeping;
    kappa=0 turns F into the real record-probability update used for pruning
    and weights.
    """
    if y not in (0, 1):
        raise ValueError("y must be 0 or 1")
    kap = params.kappa if kappa is None else kappa
    K = params.big_k
    th, tau = setting.theta, setting.tau
    m_mid = char_matrix(kap, tau, params)
    m_lo = char_matrix(kap - K, tau, params)
    m_hi = char_matrix(kap + K, tau, params)
    pref = (1.0 - 2.0 * y) / 4.0
    out = 0.5 * m_mid + pref * (np.exp(1j * th) * m_lo + np.exp(-1j * th) * m_hi)
    if kap == 0.0:
        out = out.real + 0j
    return out


def apply_map(bmap: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Advance an A-vector: a <- F a."""
    return bmap @ np.asarray(a, dtype=complex)


def free_evolve(
    a: np.ndarray, tau: float, params: NoiseParams, kappa: float | None = None
) -> np.ndarray:
    """Measurement-free segment: a <- M(kappa; tau) a.

    Equals the sum of bayes_map over both outcomes at any angle.
    """
    kap = params.kappa if kappa is None else kappa
    return char_matrix(kap, tau, params) @ np.asarray(a, dtype=complex)


def stationary_avector(params: NoiseParams) -> np.ndarray:
    """Initial A-vector: the stationary telegraph distribution."""
    return steady_state(params).astype(complex)


def stats(a: np.ndarray, params: NoiseParams) -> SufficientStats:
    """Sufficient statistics (alpha, zeta) of an A-vector.

    Scale invariant: stats(c a) == stats(a) for any nonzero complex c.
    """
    ap, am = complex(a[0]), complex(a[1])
    rp, rm = abs(ap), abs(am)
    tot = rp + rm
    if tot == 0.0:
        return SufficientStats(0.0, 0.0, alpha_defined=False)
    zeta = (rp - rm) / tot
    if rp == 0.0 or rm == 0.0:
        return SufficientStats(0.0, zeta, alpha_defined=False)
    alpha = (params.big_k / params.kappa) * np.angle(ap / am)
    return SufficientStats(float(alpha), float(zeta), alpha_defined=True)


def control_and_coherence(a: np.ndarray) -> ControlPhase:
    """Optimal final control phase arg(1^T a) and weighted coherence |1^T a|.

    The phase is undefined (flagged, reported 0) when the components cancel.
    """
    s = complex(a[0]) + complex(a[1])
    r = abs(s)
    if r == 0.0:
        return ControlPhase(0.0, 0.0, defined=False)
    return ControlPhase(float(np.angle(s)), float(r), defined=True)
