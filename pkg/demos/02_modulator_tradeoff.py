"""Modulator trade-off: contrast ratio against insertion loss, and its power cost.

Run with ``python3 demos/02_modulator_tradeoff.py``.
"""
import numpy as np

from mqwlink.laser import LaserParams
from mqwlink.modulator import (AbsorptionModel, ModulatorParams, OperatingPoint,
                               contrast_from_il, mod_efficiency, reflectivity,
                               transmitter_power)

# A larger absorption ratio K buys more contrast for the same insertion loss.
print("contrast ratio for insertion loss IL and absorption ratio K")
print("   IL " + "".join(f"   K={k:<4g}" for k in (1.5, 2, 3, 5)))
for il in (0.1, 0.2, 0.3, 0.5):
    print(f" {il:4.2f} " + "".join(f"{contrast_from_il(il, k):9.3f}" for k in (1.5, 2, 3, 5)))

# The shipped absorption table is synthetic. Its end points give the same
# contrast as the closed form.
table = AbsorptionModel()
r_on, r_off = reflectivity(table.voltages[0], table), reflectivity(table.voltages[-1], table)
print(f"\nsynthetic table: R_on = {r_on:.4f}, R_off = {r_off:.4f}, "
      f"CR = {r_on / r_off:.4f}, closed form {contrast_from_il(1 - r_on, table.k_ratio):.4f}")

# Higher insertion loss means more photocurrent, so more static dissipation.
m = ModulatorParams()
print("\nstatic modulator efficiency at K = 4")
for il in np.linspace(0.05, 0.55, 6):
    eff = mod_efficiency(il, contrast_from_il(il, m.k_ratio), m)
    print(f"  IL = {il:4.2f}   eta_mod = {eff.eta_mod:.4f}")

point = OperatingPoint.make(3e-3, 0.25, m.k_ratio, 10e9, m.v_bias, m.v_dd)
budget = transmitter_power(point, LaserParams(), m)
print(f"\npower budget at 3 mA bias, IL 0.25, 10 Gbit/s: laser "
      f"{budget.laser_wall_power * 1e3:.4f} mW, modulator static "
      f"{budget.static_power * 1e6:.2f} uW, dynamic {budget.dynamic_power * 1e6:.2f} uW, "
      f"total {budget.total * 1e3:.4f} mW")
