"""
Stern-Gerlach pointer
=====================

A spin-1/2 particle crosses a field gradient, which pushes the two spin
components apart. A linear coupling transfers that motion to a pointer
coordinate. Spin populations never change. For an equal superposition the
pointer splits into two branches, and its variance grows to about X_+^2 plus
the single-branch width.

Switching on the nonlinear term on the pointer makes that split expensive.
"""
import dataclasses

from nlqm.config import bundled_config, load
from nlqm.scenarios import stern_gerlach_run

cfg = load(bundled_config("stern_gerlach"), natural=True).scenario

up = stern_gerlach_run(dataclasses.replace(cfg, spin_amplitudes=(1.0, 0.0)))
print(f"spin up only:      X = {up.X[-1]:+.4f}   D = {up.D[-1]:.4f}")

both = stern_gerlach_run(cfg)
print(f"equal superposition: X = {both.X[-1]:+.4f}   D = {both.D[-1]:.4f}   "
      f"populations {both.populations[-1].round(12)}")
print(f"  X_+^2 + var = {up.X[-1] ** 2 + up.D[-1]:.4f}")

for w in (1.0, 10.0, 50.0):
    rep = stern_gerlach_run(cfg.with_param("w", w))
    print(f"w={w:<5} max D = {rep.D.max():.4f}   status {rep.status}")
