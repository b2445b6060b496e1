"""
Energy blocks the pointer cat
=============================

A pointer starts on top of a double-well hump. A two-branch micro system
kicks it left and right. Without the nonlinear term the pointer ends up in
both wells at once, a cat with D of order R^2. With the term on, such a state
would cost about w_eff R^2 of energy. Once that exceeds what the initial state
can supply, the spread stays small.

A sweep over w finds the crossover. It compares the crossover with the
estimate w ~ dV / (N_c R^2).

Run with --plot to save D(t) curves. Takes about a minute.
"""
import sys

import numpy as np

from nlqm import scenarios
from nlqm.config import bundled_config, load

cfg = load(bundled_config("double_well"), natural=True).scenario
values = [0.0] + list(10.0 ** np.arange(-2.0, 1.51, 0.5))

res = scenarios.sweep(cfg, "w", values)
print(f"{'w':>8} {'max D':>8} {'max E_nl':>9} {'budget':>8}  blocked")
for row in res.rows:
    print(f"{row.value:8.3g} {row.max_D:8.3f} {row.max_E_nl:9.4f} {row.budget:8.4f}  {row.blocked}")
print(f"threshold D = R^2/2 = {cfg.R**2 / 2:g}")
print(f"crossover near w = {res.w_at_transition:.3g}; estimate dV/(N_c R^2) = {res.w_estimate:.3g}")

if "--plot" in sys.argv:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    for v, rep in zip(values, res.reports):
        ax.plot(rep.times, rep.D, label=f"w={v:.3g}")
    ax.axhline(cfg.R**2 / 2, color="k", lw=0.8, ls=":")
    ax.set_xlabel("t")
    ax.set_ylabel("D")
    ax.legend(fontsize=7)
    fig.savefig("cat_blocking.png", dpi=120)
    print("wrote cat_blocking.png")
