"""Laser dynamics: threshold, light-current curve and relaxation ringing.

Run with ``python3 demos/01_laser_dynamics.py``.
"""
import numpy as np

from mqwlink.engine import SimConfig, run_laser
from mqwlink.laser import (LaserParams, light_current_curve, output_power,
                           relaxation_frequency, steady_state, threshold_current)
from mqwlink.waveform import Pulse

p = LaserParams()
i_th = threshold_current(p)
print(f"threshold current from the closed form: {i_th * 1e3:.4f} mA")

# Below threshold the photon density is set by spontaneous emission alone.
# Above it the carrier density clamps and the light output grows linearly.
currents = np.linspace(0.5, 3.0, 6) * i_th
for current, s in zip(currents, light_current_curve(p, currents)):
    ss = steady_state(p, current)
    print(f"  I = {current * 1e3:6.3f} mA   N = {ss.n:.4e} m^-3   "
          f"P = {output_power(s, p) * 1e3:8.5f} mW")

# A current step makes the laser ring at roughly its relaxation frequency
# before settling. Strong gain compression damps the ringing within ~1 ns.
step = Pulse(base=1.5 * i_th, amplitude=0.5 * i_th, t_start=5e-9, width=100e-9)
trace = run_laser(p, step, SimConfig(t_end=8e-9, dt=p.max_step, record_stride=10,
                                     transient_skip=4.5e-9))
power = trace.laser_power
print(f"\nstep 1.5 -> 2.0 I_th: output rises from {power[0] * 1e3:.4f} mW, "
      f"overshoots to {power.max() * 1e3:.4f} mW, settles at {power[-1] * 1e3:.4f} mW")
print(f"small-signal relaxation frequency at 2 I_th: "
      f"{relaxation_frequency(p, 2 * i_th) / 1e9:.3f} GHz")
