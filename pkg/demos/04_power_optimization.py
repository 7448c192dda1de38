"""Design-space search: the cheapest error-free operating point per bit rate.

Run with ``python3 demos/04_power_optimization.py`` (about a minute).
"""
from pathlib import Path

from mqwlink.config import load_config
from mqwlink.optimizer import LinkEvaluator, grid_sweep, min_power_vs_bitrate

cfg = load_config(Path(__file__).parents[1] / "configs" / "default.ini")
scenario = cfg.scenario()
evaluator = LinkEvaluator(scenario, cfg["metrics"]["decision_q"])

# A coarse sweep shows the landscape. Low bias starves the eye, while high
# bias and high insertion loss both cost power.
result = grid_sweep(cfg.sweep_axes(scenario), evaluator)
feasible = sum(sp.feasible for sp in result.points)
best = result.best_point
print(f"{len(result.points)}-point sweep at {scenario.bit_rate / 1e9:g} Gbit/s: "
      f"{feasible} error-free points")
print(f"  best: bias {best.point.bias_current * 1e3:.2f} mA, IL {best.point.il:.3f}, "
      f"total {best.power.total * 1e3:.4f} mW")
for bias, height in result.eye_vs_bias()[::2]:
    print(f"  bias {bias * 1e3:.1f} mA -> mean eye height {height * 1e3:.4f} mW")

# Grid search followed by golden-section refinement, one rate at a time.
print("\nminimum total power per bit rate")
for rate, opt in min_power_vs_bitrate(evaluator, [1e9, 4e9, 8e9], cfg.bounds()):
    if opt is None:
        print(f"  {rate / 1e9:4g} Gbit/s: no error-free point inside the bounds")
        continue
    print(f"  {rate / 1e9:4g} Gbit/s: {opt.power.total * 1e3:.4f} mW at bias "
          f"{opt.point.bias_current * 1e3:.3f} mA, IL {opt.point.il:.3f}")
