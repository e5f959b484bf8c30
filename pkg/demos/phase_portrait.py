# Filter-state phase portrait: where does the conditional estimator live?
#
# At the optimal rotation cap the null outcome pins the filter to two
# fixed points and the rare unit outcome kicks it to their images, so
# essentially all the weight sits on four atoms.  Detune the cap and the
# support smears out.

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from sqcontrol import (
    MeasurementSetting,
    NoiseParams,
    Schedule,
    StrategyConfig,
    StrategyKind,
    bayes_map,
    null_fixed_points,
    optimize_theta,
    phase_portrait,
    stats,
)

params = NoiseParams(1.0, 1.0, 0.2, 20.0)
theta_star, _ = optimize_theta()
n_steps = 12

fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
for ax, cap in zip(axes, (theta_star, 1.0)):
    sched = Schedule(
        horizon=1.0,
        strategy=StrategyConfig(kind=StrategyKind.MOAAAR, theta_cap=cap),
        params=params,
    )
    pts = [p for p in phase_portrait(sched, n_steps) if p.step == n_steps]
    z = [p.zeta for p in pts]
    a = [p.alpha for p in pts]
    w = np.array([p.weight for p in pts])
    ax.scatter(z, a, s=2000 * w + 1, alpha=0.6)
    ax.set_title(f"cap = {cap:.4f}, {len(pts)} atoms")
    ax.set_xlabel("asymmetry zeta")

    # the two null fixed points plus their images under a unit outcome
    fp = null_fixed_points(cap, params)
    anchors = []
    for sgn, e in ((1, fp.e_plus), (-1, fp.e_minus)):
        anchors.append(stats(e, params))
        kick = bayes_map(MeasurementSetting(sgn * cap, cap / params.big_k), 1, params) @ e
        anchors.append(stats(kick, params))
    spread = max(abs(p.alpha) for p in pts) or 1.0
    near = [
        min(np.hypot(p.zeta - q.zeta, (p.alpha - q.alpha) / spread) for q in anchors) < 0.05
        for p in pts
    ]
    clustered = w[near].sum() / w.sum()
    print(f"cap {cap:.4f}: {len(pts)} distinct filter states after {n_steps} steps,")
    print(f"  mass within 0.05 of the four anchor points: {clustered:.4f}")
axes[0].set_ylabel("phase estimate alpha")
fig.tight_layout()
fig.savefig("phase_portrait.png", dpi=150)
print("wrote phase_portrait.png")
