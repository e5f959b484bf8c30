"""Two independent evaluators of the controlled coherence, plus the
phase-portrait extractor.

run_exact_tree enumerates measurement records exactly, with optional sound
pruning: branches and merge residuals that are dropped are accumulated into
an additive truncation bound (each dropped record can contribute at most its
probability to the coherence sum).  run_monte_carlo simulates physical
telegraph trajectories and applies the explicit final control phase; it uses
counter-based per-trajectory random streams and a fixed block reduction so
results are bit-identical for any worker count.  The two evaluators share
nothing past the Bayesian maps, which is what makes their agreement a
meaningful end-to-end check.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .analysis import nc_coherence
from .bayes import (
    MeasurementSetting,
    bayes_map,
    likelihood,
    stationary_avector,
    stats,
)
from .controllers import StrategyConfig, StrategyKind, next_setting
from .telegraph import NoiseParams, char_matrix, sample_trajectory, steady_state

__all__ = [
    "EndRule",
    "Schedule",
    "PortraitPoint",
    "run_exact_tree",
    "run_monte_carlo",
    "phase_portrait",
]

_FIXED_TAU_KINDS = (
    StrategyKind.MOAAAR,
    StrategyKind.MOAAAR_GENERAL,
    StrategyKind.NON_ADAPTIVE_PERIODIC,
)


class EndRule(Enum):
    """How a horizon that is not a multiple of the step is handled.

    TRUNCATE stops measuring once the next step would overshoot and lets the
    final stretch evolve freely.  SNAP moves the horizon to the nearest
    measurement-grid point (fixed-step strategies only).
    """

    TRUNCATE = "truncate"
    SNAP = "snap"


@dataclass(frozen=True)
class Schedule:
    horizon: float
    strategy: StrategyConfig
    params: NoiseParams
    end_rule: EndRule = EndRule.TRUNCATE

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.end_rule is EndRule.SNAP and self.strategy.kind not in _FIXED_TAU_KINDS:
            raise ValueError("snap end rule requires a fixed-period strategy")

    def fixed_tau(self) -> float | None:
        """Step duration when the strategy has one, else None."""
        kind = self.strategy.kind
        if kind is StrategyKind.MOAAAR_GENERAL:
            return self.strategy.tau_override
        if kind in _FIXED_TAU_KINDS:
            return self.strategy.theta_cap / self.params.big_k
        return None

    def effective_horizon(self) -> float:
        if self.end_rule is EndRule.SNAP:
            tau = self.fixed_tau()
            return max(1, round(self.horizon / tau)) * tau
        return self.horizon


class PortraitPoint(NamedTuple):
    step: int
    alpha: float
    zeta: float
    weight: float


class _PolicyMemo:
    """Per-run cache of strategy decisions, keyed by the normalized A-vector.

    Every built-in policy is scale invariant, so a/(1^T a) determines the
    decision; rounding the key merges states equal to ~1e-11, far tighter
    than any decision boundary matters.
    """

    def __init__(self, config: StrategyConfig, params: NoiseParams):
        self.config = config
        self.params = params
        self.cache: dict = {}

    def __call__(self, a: np.ndarray):
        s = complex(a[0]) + complex(a[1])
        if abs(s) < 1e-300:
            return next_setting(self.config, a, self.params)
        ah = complex(a[0]) / s
        key = (round(ah.real, 11), round(ah.imag, 11))
        hit = self.cache.get(key)
        if hit is None:
            hit = next_setting(self.config, a, self.params)
            self.cache[key] = hit
        return hit


def run_exact_tree(
    schedule: Schedule,
    prune_eps: float,
    grid,
    max_branches: int = 1 << 18,
) -> list[tuple[float, float, float]]:
    """Exact record enumeration; returns [(t, coherence, truncation bound)].

    The walk is event driven: branches are bucketed by their (rounded) next
    decision time and popped in time order, so branches that meet at the
    same instant under adaptive step lengths are processed together.  With
    prune_eps = 0 the enumeration is complete and the bound is exactly 0;
    the run is rejected if it would exceed max_branches live branches.  With
    prune_eps > 0, branches whose record probability falls below
    prune_eps / live_count are dropped, and coinciding branches with
    proportional A-vectors are merged; dropped probability and merge
    residuals accumulate into the reported bound, which is valid from their
    drop time onward.

    Each requested grid time is evaluated by free-evolving every branch
    alive there and applying the final control phase; grid times past the
    horizon see only free evolution.
    """
    if not 0.0 <= prune_eps <= 0.01:
        raise ValueError("prune_eps must lie in [0, 0.01]")
    params = schedule.params
    grid = sorted(float(t) for t in grid)
    if any(t < 0 for t in grid):
        raise ValueError("grid times must be nonnegative")
    policy = _PolicyMemo(schedule.strategy, params)
    a0 = stationary_avector(params)
    if policy(a0) is None:
        return [(t, nc_coherence(t, params), 0.0) for t in grid]
    horizon = schedule.effective_horizon()
    tau_fixed = schedule.fixed_tau()
    if tau_fixed is not None and prune_eps == 0.0:
        depth = int(np.floor(horizon / tau_fixed + 1e-9))
        if depth >= 64 or 2**depth > max_branches:
            raise ValueError(
                f"2^{depth} unpruned branches would exceed cap {max_branches}; "
                "set prune_eps > 0"
            )
    merge = prune_eps > 0.0

    coh = np.zeros(len(grid))
    buckets: dict[float, tuple[list, list]] = {}
    heap: list[float] = []

    def push(tq, a, p):
        b = buckets.get(tq)
        if b is None:
            buckets[tq] = ([a], [p])
            heapq.heappush(heap, tq)
        else:
            b[0].append(a)
            b[1].append(p)

    push(0.0, a0, steady_state(params))
    drop_events: list[tuple[float, float]] = []
    live = 1

    def contribute(idx_lo, idx_hi, t0, sub):
        # grid[idx_lo:idx_hi] all see free evolution from t0
        for gi in range(idx_lo, idx_hi):
            v = char_matrix(params.kappa, grid[gi] - t0, params) @ sub.T
            coh[gi] += np.abs(v[0] + v[1]).sum()

    while heap:
        tq = heapq.heappop(heap)
        alist, plist = buckets.pop(tq)
        a = np.array(alist)
        p = np.array(plist)
        if merge and len(a) > 1:
            svec = a[:, 0] + a[:, 1]
            reps: dict = {}
            order = []
            for i in range(len(a)):
                if abs(svec[i]) > 1e-300:
                    ah = a[i, 0] / svec[i]
                    # keep the sign of zeta in the key so branches are never
                    # merged across the feedback decision boundary
                    side = abs(ah) >= abs(1.0 - ah)
                    key = (round(ah.real, 11), round(ah.imag, 11), side)
                else:
                    key = ("null", i)
                rep = reps.get(key)
                if rep is None:
                    reps[key] = [a[i], svec[i], 1.0, p[i].copy()]
                    order.append(key)
                else:
                    c = svec[i] / rep[1]
                    drop_events.append((tq, float(np.abs(a[i] - c * rep[0]).sum())))
                    rep[2] += abs(c)
                    rep[3] += p[i]
            a = np.array([reps[k][0] * reps[k][2] for k in order])
            p = np.array([reps[k][3] for k in order])
        if prune_eps > 0.0 and len(a) > 1:
            mass = p.sum(axis=1)
            keep = mass >= prune_eps / max(1, live)
            if not keep.all():
                drop_events.append((tq, float(mass[~keep].sum())))
                a, p = a[keep], p[keep]
        live += len(a) - len(alist)
        if prune_eps == 0.0 and live > max_branches:
            raise ValueError(
                f"live branch count exceeded cap {max_branches}; set prune_eps > 0"
            )
        groups: dict = {}
        for i in range(len(a)):
            groups.setdefault(policy(a[i]), []).append(i)
        for setting, idx in groups.items():
            sub = a[idx]
            subp = p[idx]
            t_next = tq + setting.tau
            if t_next <= horizon + 1e-9:
                lo = bisect_left(grid, tq - 1e-9)
                hi = bisect_left(grid, t_next - 1e-9)
                contribute(lo, hi, tq, sub)
                tqn = round(t_next, 9)
                for y in (0, 1):
                    fk = bayes_map(setting, y, params)
                    fp = bayes_map(setting, y, params, kappa=0.0).real
                    ca = sub @ fk.T
                    cp = subp @ fp.T
                    for j in range(len(idx)):
                        push(tqn, ca[j], cp[j])
                live += len(idx)
            else:
                lo = bisect_left(grid, tq - 1e-9)
                contribute(lo, len(grid), tq, sub)
                live -= len(idx)

    out = []
    drop_events.sort()
    times = [te for te, _ in drop_events]
    masses = np.cumsum([m for _, m in drop_events]) if drop_events else np.array([])
    for gi, tg in enumerate(grid):
        k = bisect_right(times, tg + 1e-9)
        bound = float(masses[k - 1]) if k > 0 else 0.0
        out.append((tg, float(coh[gi]), bound))
    return out


def phase_portrait(
    schedule: Schedule,
    n_steps: int,
    prune_eps: float = 0.0,
    max_branches: int = 1 << 18,
) -> list[PortraitPoint]:
    """Sufficient-statistics portrait of all records up to n_steps.

    Returns one point per distinct (alpha, zeta) per step, weights being the
    record probabilities; branches coinciding within 1e-9 in both
    coordinates are aggregated.  Weights at fixed step sum to 1 minus the
    mass pruned so far.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if not 0.0 <= prune_eps <= 0.01:
        raise ValueError("prune_eps must lie in [0, 0.01]")
    params = schedule.params
    policy = _PolicyMemo(schedule.strategy, params)
    branches = [(stationary_avector(params), steady_state(params))]
    points: list[PortraitPoint] = []

    def emit(step):
        agg: dict[tuple[float, float], float] = {}
        for av, pv in branches:
            st = stats(av, params)
            key = (round(st.alpha, 9), round(st.zeta, 9))
            agg[key] = agg.get(key, 0.0) + float(pv.sum())
        for (alpha, zeta), w in sorted(agg.items()):
            points.append(PortraitPoint(step, alpha, zeta, w))

    emit(0)
    for n in range(1, n_steps + 1):
        nxt = []
        for av, pv in branches:
            setting = policy(av)
            if setting is None:
                raise ValueError("phase portrait needs a measuring strategy")
            for y in (0, 1):
                fk = bayes_map(setting, y, params)
                fp = bayes_map(setting, y, params, kappa=0.0).real
                nxt.append((fk @ av, fp @ pv))
        if prune_eps > 0.0:
            thr = prune_eps / max(1, len(nxt))
            nxt = [(av, pv) for av, pv in nxt if pv.sum() >= thr]
        if prune_eps == 0.0 and len(nxt) > max_branches:
            raise ValueError(
                f"branch count exceeded cap {max_branches}; set prune_eps > 0"
            )
        branches = nxt
        emit(n)
    return points


def _mc_block(args) -> tuple[np.ndarray, np.ndarray]:
    """Simulate trajectories [start, stop); returns per-batch phasor sums."""
    schedule, grid, seed, start, stop, n_batches = args
    params = schedule.params
    policy = _PolicyMemo(schedule.strategy, params)
    horizon = schedule.effective_horizon()
    t_max = max(horizon, grid[-1]) if grid else horizon
    acc = np.zeros((n_batches, len(grid)), dtype=complex)
    counts = np.zeros(n_batches, dtype=np.int64)
    kap, big_k = params.kappa, params.big_k
    for itraj in range(start, stop):
        rng = np.random.Generator(np.random.Philox(key=[seed, itraj]))
        traj = sample_trajectory(params, t_max + 1e-9, rng)
        av = stationary_avector(params)
        t_n = 0.0
        x_total = 0.0
        gi = 0
        vals = np.empty(len(grid), dtype=complex)
        while True:
            setting = policy(av)
            t_next = np.inf if setting is None else t_n + setting.tau
            ended = t_next > horizon + 1e-9
            while gi < len(grid) and (ended or grid[gi] < t_next - 1e-9):
                tg = grid[gi]
                xg = x_total + traj.integrate(t_n, tg)
                ag = char_matrix(kap, tg - t_n, params) @ av
                phase = np.angle(ag[0] + ag[1])
                vals[gi] = np.exp(1j * (kap * xg - phase))
                gi += 1
            if ended:
                break
            x = traj.integrate(t_n, t_next)
            x_total += x
            y = 1 if rng.random() < likelihood(1, setting.theta, x, big_k) else 0
            av = bayes_map(setting, y, params) @ av
            t_n = t_next
        b = itraj % n_batches
        acc[b] += vals
        counts[b] += 1
    return acc, counts


def run_monte_carlo(
    schedule: Schedule,
    n_traj: int,
    seed: int,
    grid,
    workers: int = 1,
    n_batches: int = 30,
    block_size: int = 4096,
) -> list[tuple[float, float, float]]:
    """Trajectory Monte Carlo; returns [(t, coherence estimate, standard error)].

    Each trajectory gets its own counter-based stream keyed by
    (seed, trajectory index), and per-batch phasor sums are reduced within
    fixed blocks of block_size consecutive trajectories, then across blocks
    in index order.  The arithmetic is therefore identical for any workers
    value, making seeded runs bit-for-bit reproducible under any
    parallel partitioning.  Errors are 30-batch standard errors of the
    coherence modulus.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    grid = sorted(float(t) for t in grid)
    if any(t < 0 for t in grid):
        raise ValueError("grid times must be nonnegative")
    blocks = [
        (schedule, grid, seed, lo, min(lo + block_size, n_traj), n_batches)
        for lo in range(0, n_traj, block_size)
    ]
    if workers == 1 or len(blocks) == 1:
        results = [_mc_block(b) for b in blocks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mc_block, blocks))
    acc = np.zeros((n_batches, len(grid)), dtype=complex)
    counts = np.zeros(n_batches, dtype=np.int64)
    for block_acc, block_counts in results:
        acc += block_acc
        counts += block_counts
    est = np.abs(acc.sum(axis=0)) / n_traj
    nonempty = counts > 0
    if nonempty.sum() >= 2:
        means = np.abs(acc[nonempty] / counts[nonempty, None])
        se = means.std(axis=0, ddof=1) / np.sqrt(nonempty.sum())
    else:
        se = np.full(len(grid), np.inf)
    return [(tg, float(est[i]), float(se[i])) for i, tg in enumerate(grid)]
