"""Random telegraph process: parameters, sampling, exact path integrals,
and the characteristic-matrix propagator.

The telegraph sign z(t) flips between +1 and -1 as a two-state
continuous-time Markov chain: rate gamma_down out of z=+1, rate gamma_up
out of z=-1.  Everything downstream (Bayesian maps, decay rates, both
simulation engines) is built on the 2x2 complex propagator

    M(k; tau) = exp[(Lambda + i k Z) tau],   Z = diag(+1, -1),

whose (z', z) entry is E[exp(i k x) 1{z_tau = z'} | z_0 = z] with
x = integral of z(s) ds over the interval.

Index convention used everywhere in this package: component 0 <-> z=+1,
component 1 <-> z=-1.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseParams",
    "RtpTrajectory",
    "rate_matrix",
    "steady_state",
    "sample_trajectory",
    "integrate",
    "char_matrix",
]


@dataclass(frozen=True)
class NoiseParams:
    """Physical parameters of the noise-plus-probe system.

    gamma_up / gamma_down are the telegraph flip rates into z=+1 and
    z=-1 respectively, kappa the data-qubit coupling to z, and big_k
    the (much larger) spectator-qubit coupling.
    """

    gamma_up: float
    gamma_down: float
    kappa: float
    big_k: float

    def __post_init__(self):
        for name in ("gamma_up", "gamma_down", "kappa", "big_k"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be strictly positive and finite, got {v!r}")

    @property
    def gamma_bar(self) -> float:
        """Mean flip rate (gamma_up + gamma_down)/2."""
        return 0.5 * (self.gamma_up + self.gamma_down)

    @property
    def gamma_breve(self) -> float:
        """Harmonic mean of the flip rates; the stationary jump rate."""
        return 2.0 * self.gamma_up * self.gamma_down / (self.gamma_up + self.gamma_down)


@dataclass(frozen=True)
class RtpTrajectory:
    """One realization of the telegraph sign on [0, horizon].

    jumps holds the exact flip times (strictly increasing); the sign at
    time t is z0 * (-1)**(number of jumps <= t).
    """

    z0: int
    jumps: tuple[float, ...]
    horizon: float

    def __post_init__(self):
        if self.z0 not in (1, -1):
            raise ValueError(f"z0 must be +1 or -1, got {self.z0!r}")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        prev = -np.inf
        for t in self.jumps:
            if not 0.0 <= t <= self.horizon:
                raise ValueError("jump time outside [0, horizon]")
            if t <= prev:
                raise ValueError("jump times must be strictly increasing")
            prev = t

    def sign_at(self, t: float) -> int:
        """Telegraph sign at time t (jumps at t already applied)."""
        if not 0.0 <= t <= self.horizon:
            raise ValueError("t outside trajectory support")
        return self.z0 * (-1) ** bisect_right(self.jumps, t)

    def integrate(self, t1: float, t2: float) -> float:
        """Exact signed integral of z(s) over [t1, t2]."""
        if not 0.0 <= t1 <= t2 <= self.horizon:
            raise ValueError("need 0 <= t1 <= t2 <= horizon")
        if t1 == t2:
            return 0.0
        i1 = bisect_right(self.jumps, t1)
        i2 = bisect_left(self.jumps, t2)
        pts = [t1, *self.jumps[i1:i2], t2]
        total = 0.0
        sign = self.z0 * (-1) ** i1
        for a, b in zip(pts[:-1], pts[1:]):
            total += sign * (b - a)
            sign = -sign
        return total


def rate_matrix(params: NoiseParams) -> np.ndarray:
    """Generator Lambda of the telegraph chain (columns sum to zero)."""
    gu, gd = params.gamma_up, params.gamma_down
    return np.array([[-gd, gu], [gd, -gu]])


def steady_state(params: NoiseParams) -> np.ndarray:
    """Stationary distribution (P(z=+1), P(z=-1)) = (gamma_up, gamma_down)/(2 gamma_bar)."""
    return np.array([params.gamma_up, params.gamma_down]) / (2.0 * params.gamma_bar)


def sample_trajectory(
    params: NoiseParams,
    horizon: float,
    rng: np.random.Generator,
    z0: int | str = "stationary",
) -> RtpTrajectory:
    """Draw one telegraph path by inverse-CDF exponential holding times.

    z0 may be +1, -1, or "stationary" (draw the initial sign from
    steady_state).  Jump times are kept exactly; there is no time grid.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if z0 == "stationary":
        z = 1 if rng.random() < steady_state(params)[0] else -1
    elif z0 in (1, -1):
        z = int(z0)
    else:
        raise ValueError(f"z0 must be +1, -1 or 'stationary', got {z0!r}")
    start = z
    jumps = []
    t = 0.0
    while True:
        rate = params.gamma_down if z > 0 else params.gamma_up
        t += rng.exponential(1.0 / rate)
        if t >= horizon:
            break
        jumps.append(t)
        z = -z
    return RtpTrajectory(z0=start, jumps=tuple(jumps), horizon=horizon)


def integrate(traj: RtpTrajectory, t1: float, t2: float) -> float:
    """Exact signed integral of z(s) over [t1, t2] (|result| <= t2 - t1)."""
    return traj.integrate(t1, t2)


def char_matrix(k: float, tau: float, params: NoiseParams) -> np.ndarray:
    """Characteristic matrix M(k; tau) = exp[(Lambda + i k Z) tau].

    Entry (z', z) is E[exp(i k x) 1{z_tau = z'} | z_0 = z].  Evaluated in
    closed form from the 2x2 eigen-structure,

        exp(A tau) = exp(-gb tau) [cosh(D tau) I + sinh(D tau)/D (A + gb I)],
        D^2 = gb^2 - k^2 - i k (gamma_down - gamma_up),

    written with exp(+-(D - gb) tau) factors so nothing overflows, and a
    series for sinh(D tau)/D when |D tau| is tiny.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    gu, gd = params.gamma_up, params.gamma_down
    gb = 0.5 * (gu + gd)
    A = np.array([[-gd + 1j * k, gu], [gd, -gu - 1j * k]])
    delta = np.sqrt(complex(gb * gb - k * k - 1j * k * (gd - gu)))
    dt = delta * tau
    if abs(dt) < 1e-6:
        # cosh and sinh(x)/x to O(x^6); exact enough at |x| < 1e-6
        ch = 1.0 + dt * dt / 2.0 + dt**4 / 24.0
        sh_over = tau * (1.0 + dt * dt / 6.0 + dt**4 / 120.0)
        out = np.exp(-gb * tau) * (ch * np.eye(2) + sh_over * (A + gb * np.eye(2)))
    else:
        ep = np.exp((delta - gb) * tau)
        em = np.exp(-(delta + gb) * tau)
        ch = 0.5 * (ep + em)
        sh_over = 0.5 * (ep - em) / delta
        out = ch * np.eye(2) + sh_over * (A + gb * np.eye(2))
    return out
