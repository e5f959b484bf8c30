# The cost curve for the capped-rotation rule and its minimum.

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from sqcontrol import h_theta, optimize_theta

theta_star, h_star = optimize_theta()
print(f"minimum at theta = {theta_star:.6f} with scaled rate {h_star:.6f}")
print(f"value at pi/2 (greedy limit) = {h_theta(np.pi / 2):.6f}")

thetas = np.linspace(0.3, 3.0, 400)
curve = [h_theta(t) for t in thetas]

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(thetas, curve)
ax.plot([theta_star], [h_star], "ro")
ax.annotate(
    f"({theta_star:.3f}, {h_star:.3f})",
    (theta_star, h_star),
    textcoords="offset points",
    xytext=(8, -12),
)
ax.axhline(h_theta(np.pi / 2), color="gray", ls=":", lw=1)
ax.set_xlabel("rotation cap theta")
ax.set_ylabel("scaled asymptotic rate")
ax.set_ylim(0, 8)
fig.tight_layout()
fig.savefig("optimal_theta.png", dpi=150)
print("wrote optimal_theta.png")
