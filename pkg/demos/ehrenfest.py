"""
Centroid motion does not see the nonlinear term
===============================================

The nonlinear energy depends only on the spread of the centroid, and shifting
every coordinate together leaves it unchanged. So it exerts no net force and
the centroid obeys the ordinary Ehrenfest law. In a harmonic well that law is
exactly Newtonian, whatever w is.

In a cubic well the centroid feels the curvature of the force averaged over
the packet: m X'' = -V'(X) - 3c L^2, where L^2 is the packet variance.
"""
import sys

import numpy as np

from nlqm import scenarios
from nlqm.config import bundled_config, load
from nlqm.observables import ehrenfest_residual

harmonic = load(bundled_config("harmonic"), natural=True).scenario
for w in (0.0, 0.5, 5.0):
    rec = scenarios.run(harmonic.with_param("w", w))
    t, X = rec.column("t"), rec.column("X")
    print(f"w={w:<4}  max |X - cos t| = {np.max(np.abs(X - np.cos(t))):.2e}   "
          f"final packet variance {rec.column('L2')[-1]:.4f}")

cubic = load(bundled_config("cubic"), natural=True).scenario
_, ham, _ = scenarios.build(cubic)
rec = scenarios.run(cubic, keep_fields=True)
rep = ehrenfest_residual(rec, ham, rec.fields)
c = ham.potentials[0].c
print(f"cubic well: Newton with V'(X) misses by up to {np.max(np.abs(rep.naive)):.3e}")
print(f"            3 c L^2 accounts for it to {np.max(np.abs(rep.naive + 3 * c * rep.L2)):.1e}")

if "--plot" in sys.argv:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    ax.plot(rep.times, rep.naive, label="naive residual")
    ax.plot(rep.times, -3 * c * rep.L2, "--", label="-3 c L^2")
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig("ehrenfest_cubic.png", dpi=120)
    print("wrote ehrenfest_cubic.png")
