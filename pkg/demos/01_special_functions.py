"""Mittag-Leffler relaxation and one-sided stable densities.

Shows the fractional relaxation E_(a,1)(-t^a) interpolating between stretched
exponential (short times) and power-law decay (long times), the uniform
algebraic envelope C/(1+s), and the one-sided stable density with its
closed-form anchor at index 1/2.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from tfcauchy import (ml_half_closed_form, ml_uniform_decay_constant,
                      mittag_leffler, stable_density, stable_density_series)

out = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(out, exist_ok=True)

t = np.logspace(-2, 3, 300)

fig, axes = plt.subplots(1, 3, figsize=(15, 4))

ax = axes[0]
for alpha in (0.3, 0.5, 0.7, 0.9, 1.0):
    ax.loglog(t, mittag_leffler(alpha, 1.0, -t ** alpha), label=f"alpha={alpha}")
ax.loglog(t, 1.0 / (1.0 + t), "k:", label="1/(1+s)")
ax.set_xlabel("t"), ax.set_ylabel("E_(a,1)(-t^a)")
ax.set_title("fractional relaxation")
ax.legend(fontsize=8)

ax = axes[1]
s = np.logspace(-3, 6, 300)
for alpha, beta in [(0.3, 1.0), (0.5, 0.5), (0.7, 1.3), (0.9, 0.9)]:
    c = ml_uniform_decay_constant(alpha, beta)
    ax.semilogx(s, (1.0 + s) * np.abs(mittag_leffler(alpha, beta, -s)),
                label=f"({alpha},{beta}), sup={c:.3f}")
ax.set_xlabel("s"), ax.set_ylabel("(1+s)|E(-s)|")
ax.set_title("uniform algebraic envelope")
ax.legend(fontsize=8)

ax = axes[2]
x = np.logspace(-1.2, 1.7, 200)
for alpha in (0.3, 0.5, 0.8):
    ax.loglog(x, stable_density(alpha, x), label=f"alpha={alpha}")
closed = x ** -1.5 * np.exp(-0.25 / x) / (2.0 * np.sqrt(np.pi))
ax.loglog(x, closed, "k:", lw=1, label="alpha=1/2 closed form")
ax.set_xlabel("x"), ax.set_ylabel("g_1(x)")
ax.set_title("one-sided stable densities")
ax.legend(fontsize=8)

fig.tight_layout()
fig.savefig(os.path.join(out, "special_functions.png"), dpi=130)
print("wrote", os.path.join(out, "special_functions.png"))

# numeric cross-checks, printed
print("\nE_(1/2,1)(-1) =", mittag_leffler(0.5, 1.0, -1.0),
      " (closed form:", float(ml_half_closed_form(-1.0)), ")")
for alpha in (0.3, 0.7):
    z, p = stable_density(alpha, 10.0), stable_density_series(alpha, 10.0)
    print(f"g_1(10; {alpha}): integral={z:.12g}  tail series={p:.12g}")
