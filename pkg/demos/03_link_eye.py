"""End-to-end link: eye quality of the default transmitter across bit rates.

Run with ``python3 demos/03_link_eye.py``.
"""
from pathlib import Path

from mqwlink.config import load_config
from mqwlink.metrics import evaluate_eye, eye_vs_bitrate, max_error_free_bitrate

cfg = load_config(Path(__file__).parents[1] / "configs" / "default.ini")
scenario = cfg.scenario()

eye, m = evaluate_eye(scenario)
print(f"default scenario at {scenario.bit_rate / 1e9:g} Gbit/s")
print(f"  one level {m.level_one_mean * 1e3:.4f} mW, zero level {m.level_zero_mean * 1e3:.4f} mW")
print(f"  eye height {m.eye_height * 1e3:.4f} mW, width {m.eye_width * 1e12:.1f} ps")
print(f"  Q {m.q_factor:.2f}, estimated BER {m.ber_estimate:.2e}, "
      f"error-free {'yes' if m.error_free else 'no'}")

# The laser cannot follow the drive once a bit gets shorter than its
# response time, so the eye closes as the rate climbs.
rates = cfg["metrics"]["rates_bps"]
print("\n  rate (Gbit/s)   eye height (mW)        Q")
for rate, mm in zip(rates, eye_vs_bitrate(scenario, rates)):
    print(f"  {rate / 1e9:13g}   {mm.eye_height * 1e3:15.4f}   {mm.q_factor:8.2f}")
cutoff = max_error_free_bitrate(scenario, rates)
print(f"\nhighest error-free rate on this grid: {cutoff / 1e9:g} Gbit/s")
