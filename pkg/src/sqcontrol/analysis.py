"""Closed-form and semi-analytic results: null-outcome fixed points, the
ergodic decay rate of the constant-angle policy, the asymptotic cost
H(Theta) and its minimum, the no-control coherence, and rate extraction by
slope fitting.

The ergodic rate is a per-step relative loss of order (kappa/K)^2 divided by
a step of order 1/K; in the interesting regime (kappa=1e-3, K=1e3) the loss
sits 13 orders of magnitude below 1, far beyond float64 cancellation, so the
fixed-point algebra runs in mpmath at 60 significant digits and only the
final rate is returned as a float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.optimize import minimize_scalar

from .bayes import MeasurementSetting, bayes_map
from .telegraph import NoiseParams, char_matrix, steady_state

__all__ = [
    "DegenerateDominanceError",
    "FixedPointPair",
    "RateResult",
    "fixed_point",
    "null_fixed_points",
    "ergodic_rate",
    "h_theta",
    "optimize_theta",
    "nc_coherence",
    "nc_rate",
    "scale_rate",
    "fit_rate",
]


class DegenerateDominanceError(ValueError):
    """Raised when a map's two eigenvalue moduli coincide within tolerance."""


@dataclass(frozen=True)
class FixedPointPair:
    """Dominant eigenvectors of the two null-outcome maps, plus eigenvalues."""

    e_plus: np.ndarray
    e_minus: np.ndarray
    eigenvalues: tuple[complex, complex]


def fixed_point(bmap: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, complex]:
    """Dominant eigenvector of a 2x2 complex map, with its eigenvalue.

    Normalized to |a_plus| + |a_minus| = 1 and arg(a_plus + a_minus) = 0.
    Raises DegenerateDominanceError when the eigenvalue moduli are equal
    within tol.
    """
    lam, vecs = np.linalg.eig(np.asarray(bmap, dtype=complex))
    moduli = np.abs(lam)
    if abs(moduli[0] - moduli[1]) < tol:
        raise DegenerateDominanceError(
            f"eigenvalue moduli {moduli[0]:.15g}, {moduli[1]:.15g} coincide within {tol}"
        )
    i = int(np.argmax(moduli))
    v = vecs[:, i]
    v = v / (abs(v[0]) + abs(v[1]))
    s = v[0] + v[1]
    if abs(s) > 0:
        v = v * np.exp(-1j * np.angle(s))
    return v, complex(lam[i])


def null_fixed_points(
    theta_cap: float, params: NoiseParams, tau: float | None = None
) -> FixedPointPair:
    """Fixed points E0+- of the null-outcome maps at +-theta_cap."""
    if tau is None:
        tau = theta_cap / params.big_k
    ep, lp = fixed_point(bayes_map(MeasurementSetting(theta_cap, tau), 0, params))
    em, lm = fixed_point(bayes_map(MeasurementSetting(-theta_cap, tau), 0, params))
    return FixedPointPair(e_plus=ep, e_minus=em, eigenvalues=(lp, lm))


def _mp_char(k, tau, gu, gd):
    gb = (gu + gd) / 2
    delta = mp.sqrt(gb**2 - k**2 - 1j * k * (gd - gu))
    A = mp.matrix([[-gd + 1j * k, gu], [gd, -gu - 1j * k]])
    eye = mp.eye(2)
    dt = delta * tau
    ch = mp.cosh(dt)
    sh_over = tau if dt == 0 else mp.sinh(dt) / delta
    return mp.exp(-gb * tau) * (ch * eye + sh_over * (A + gb * eye))


def _mp_bayes(theta, tau, y, gu, gd, kappa, K):
    m_mid = _mp_char(mp.mpf(kappa), tau, gu, gd)
    m_lo = _mp_char(mp.mpf(kappa) - K, tau, gu, gd)
    m_hi = _mp_char(mp.mpf(kappa) + K, tau, gu, gd)
    pref = mp.mpf(1 - 2 * y) / 4
    e = mp.exp(1j * theta)
    return m_mid / 2 + pref * (e * m_lo + m_hi / e)


def _mp_dominant(M, tol=mp.mpf("1e-12")):
    a, b = M[0, 0], M[0, 1]
    c, d = M[1, 0], M[1, 1]
    half_tr = (a + d) / 2
    disc = mp.sqrt(((a - d) / 2) ** 2 + b * c)
    l1, l2 = half_tr + disc, half_tr - disc
    if abs(abs(l1) - abs(l2)) < tol:
        raise DegenerateDominanceError("degenerate dominant eigenvalue")
    lam = l1 if abs(l1) > abs(l2) else l2
    if abs(b) >= abs(c):
        v = mp.matrix([b, lam - a])
    else:
        v = mp.matrix([lam - d, c])
    n = abs(v[0]) + abs(v[1])
    v = v / n
    s = v[0] + v[1]
    return v / mp.sign(s), lam


def ergodic_rate(
    theta_cap: float, params: NoiseParams, tau: float | None = None
) -> float:
    """Long-time decay rate of the constant-angle policy on its attractor.

    Stationary-weighted per-step relative coherence loss at the two
    null-outcome fixed points, divided by the step duration:

        rate = sum_s P_ss(s) (|1^T E_s| - sum_y |1^T F_s^y E_s|) / (tau |1^T E_s|).

    tau defaults to theta_cap / K.
    """
    if not 0 < theta_cap <= math.pi:
        raise ValueError("theta_cap must be in (0, pi]")
    if tau is None:
        tau = theta_cap / params.big_k
    gu, gd = params.gamma_up, params.gamma_down
    with mp.workdps(60):
        t = mp.mpf(tau)
        pss = (mp.mpf(gu) / (gu + gd), mp.mpf(gd) / (gu + gd))
        total = mp.mpf(0)
        for s, w in zip((1, -1), pss):
            F0 = _mp_bayes(s * mp.mpf(theta_cap), t, 0, gu, gd, params.kappa, params.big_k)
            E, _ = _mp_dominant(F0)
            coh = abs(E[0] + E[1])
            kept = mp.mpf(0)
            for y in (0, 1):
                Fy = F0 if y == 0 else (
                    _mp_bayes(s * mp.mpf(theta_cap), t, 1, gu, gd, params.kappa, params.big_k)
                )
                v = Fy * E
                kept += abs(v[0] + v[1])
            total += w * (coh - kept) / (t * coh)
        return float(total)


def h_theta(theta_cap: float) -> float:
    """Asymptotic dimensionless cost of the constant-angle policy.

    H(Theta) = 3 Theta^2 csc^4(Theta) - [2 Theta (Theta - cot Theta) + 1] csc^2(Theta)
               + Theta^2 / 3 - 1,  on (0, pi).
    """
    if not 0 < theta_cap < math.pi:
        raise ValueError("theta_cap must be inside (0, pi)")
    csc2 = 1.0 / math.sin(theta_cap) ** 2
    cot = math.cos(theta_cap) / math.sin(theta_cap)
    th2 = theta_cap * theta_cap
    return (
        3.0 * th2 * csc2 * csc2
        - (2.0 * theta_cap * (theta_cap - cot) + 1.0) * csc2
        + th2 / 3.0
        - 1.0
    )


def optimize_theta() -> tuple[float, float]:
    """Minimize h_theta on (0.1, pi - 0.1); returns (theta_star, h_star)."""
    res = minimize_scalar(
        h_theta,
        bounds=(0.1, math.pi - 0.1),
        method="bounded",
        options={"xatol": 1e-6},
    )
    return float(res.x), float(res.fun)


def nc_coherence(t: float, params: NoiseParams) -> float:
    """Data-qubit coherence with no control: |1^T M(kappa; t) P_ss|."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    v = char_matrix(params.kappa, t, params) @ steady_state(params)
    return float(abs(v[0] + v[1]))


def nc_rate(params: NoiseParams) -> float:
    """Asymptotic no-control decay rate kappa^2 gamma_breve / (2 gamma_bar^2)."""
    return params.kappa**2 * params.gamma_breve / (2.0 * params.gamma_bar**2)


def scale_rate(rate: float, params: NoiseParams) -> float:
    """Scale a decay rate to the O(1) asymptotic convention: rate 2K^2/(gamma_breve kappa^2)."""
    return rate * 2.0 * params.big_k**2 / (params.gamma_breve * params.kappa**2)


@dataclass(frozen=True)
class RateResult:
    """Slope-fit decay rate with the scaled value and fit diagnostics."""

    rate: float
    scaled_rate: float
    window: tuple[float, float]
    residual: float
    flagged: bool


def fit_rate(
    series,
    params: NoiseParams,
    window: tuple[float, float] | None = None,
    residual_threshold: float = 1e-3,
) -> RateResult:
    """Least-squares slope of -ln(coherence) versus t on a window.

    series is an iterable of (t, coherence) with coherence in (0, 1].  The
    window defaults to [5 / gamma_breve, max t], skipping the initial
    transient.  The result is flagged when the rms fit residual exceeds
    residual_threshold (or the slope comes out negative).
    """
    pts = [(float(t), float(c)) for t, c in series]
    for t, c in pts:
        if not 0.0 < c <= 1.0 + 1e-12:
            raise ValueError(f"coherence {c} at t={t} outside (0, 1]")
    if window is None:
        window = (5.0 / params.gamma_breve, max(t for t, _ in pts))
    lo, hi = window
    sel = [(t, c) for t, c in pts if lo - 1e-12 <= t <= hi + 1e-12]
    if len(sel) < 5:
        raise ValueError(f"need at least 5 points in window {window}, found {len(sel)}")
    ts = np.array([t for t, _ in sel])
    ys = -np.log(np.array([c for _, c in sel]))
    design = np.vstack([ts, np.ones_like(ts)]).T
    sol, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = float(np.sqrt(np.mean((ys - design @ sol) ** 2)))
    rate = float(sol[0])
    return RateResult(
        rate=rate,
        scaled_rate=scale_rate(rate, params),
        window=(float(lo), float(hi)),
        residual=resid,
        flagged=resid > residual_threshold or rate < 0,
    )
