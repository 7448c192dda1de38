"""CSV writers and gnuplot script emission.

Every file starts with a ``#`` block echoing the resolved configuration,
followed by one header row and data rows. Floats are written as ``%.16e``
(17 significant digits, exact round trip, locale independent) with LF line
endings, so reruns are byte-identical.
"""
from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np

from .config import Config, config_header
from .engine import Trace
from .metrics import EyeDiagram, EyeMetrics
from .optimizer import SweepResult

TRACE_COLUMNS = ("time_s", "carrier_density_m3", "photon_density_m3", "phase_rad",
                 "laser_power_w", "mod_drive_v", "output_power_w")
EYE_COLUMNS = ("ui_fraction", "power_w")
SWEEP_COLUMNS = ("bias_current_a", "il", "cr", "bit_rate_bps", "v_bias_v", "v_dd_v",
                 "static_power_w", "dynamic_power_w", "laser_wall_power_w", "total_power_w",
                 "eta_mod", "eye_height_w", "eye_width_s", "q_factor", "extinction_ratio",
                 "error_free", "status")
OPTIMUM_COLUMNS = ("bit_rate_bps",) + tuple(c for c in SWEEP_COLUMNS if c != "bit_rate_bps")
BITRATE_COLUMNS = ("bit_rate_bps", "eye_height_w", "eye_width_s", "q_factor",
                   "extinction_ratio", "ber_estimate", "error_free")
PLOT_KINDS = ("photon_density", "output_power", "eye", "min_power_curve")


def fmt(x) -> str:
    return "%.16e" % float(x)


def _header(cfg: Config | None) -> str:
    return config_header(cfg) if cfg is not None else ""


def _write(destination, text: str) -> int:
    data = text.encode("ascii")
    if hasattr(destination, "write"):
        destination.write(text)
        return len(data)
    with open(destination, "wb") as f:
        f.write(data)
    return len(data)


def _table(columns, rows, cfg: Config | None, footer: str = "") -> str:
    out = io.StringIO()
    out.write(_header(cfg))
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(row) + "\n")
    out.write(footer)
    return out.getvalue()


def write_trace_csv(trace: Trace, destination, cfg: Config | None = None) -> int:
    """Write one row per trace sample; returns the number of bytes written."""
    data = np.column_stack([trace.time, trace.carrier_density, trace.photon_density,
                            trace.phase, trace.laser_power, trace.modulator_drive,
                            trace.output_power])
    out = io.StringIO()
    out.write(_header(cfg))
    out.write(",".join(TRACE_COLUMNS) + "\n")
    if len(data):
        np.savetxt(out, data, fmt="%.16e", delimiter=",", newline="\n")
    return _write(destination, out.getvalue())


def _metrics_footer(m: EyeMetrics) -> str:
    lines = [f"# eye_height_w = {fmt(m.eye_height)}", f"# eye_width_s = {fmt(m.eye_width)}",
             f"# level_one_w = {fmt(m.level_one_mean)}",
             f"# level_zero_w = {fmt(m.level_zero_mean)}",
             f"# q_factor = {fmt(m.q_factor)}",
             f"# extinction_ratio = {fmt(m.extinction_ratio)}",
             f"# ber_estimate = {fmt(m.ber_estimate)}",
             f"# error_free = {int(m.error_free)}"]
    return "\n".join(lines) + "\n"


def write_eye_csv(eye: EyeDiagram, metrics: EyeMetrics, destination,
                  cfg: Config | None = None) -> int:
    """Folded eye samples (position in [0, 2) unit intervals, power) plus metrics."""
    rows = ((fmt(x), fmt(p)) for x, p in zip(eye.ui_position, eye.power))
    return _write(destination, _table(EYE_COLUMNS, rows, cfg, _metrics_footer(metrics)))


def _point_fields(point, power, eye, values: dict | None = None) -> list[str]:
    if point is None:
        v = values or {}
        axes = [fmt(v.get(k, np.nan)) for k in ("bias_current", "il")]
        axes += [fmt(np.nan), fmt(v.get("bit_rate", np.nan)), fmt(v.get("v_bias", np.nan)),
                 fmt(v.get("v_dd", np.nan))]
        return axes + [fmt(np.nan)] * 9 + ["0"]
    fields = [point.bias_current, point.il, point.cr, point.bit_rate, point.v_bias,
              point.v_dd, power.static_power, power.dynamic_power, power.laser_wall_power,
              power.total, power.eta_mod, eye.eye_height, eye.eye_width, eye.q_factor,
              eye.extinction_ratio]
    return [fmt(x) for x in fields] + [str(int(eye.error_free))]


def write_sweep_csv(result: SweepResult, destination, cfg: Config | None = None) -> int:
    """One row per grid point (sweep order) and a ``# best: <row index|none>`` footer."""
    rows, errors = [], []
    for i, sp in enumerate(result.points):
        status = "ok" if sp.error is None else "failed"
        rows.append(_point_fields(sp.point, sp.power, sp.eye, sp.values) + [status])
        if sp.error is not None:
            errors.append(f"# error {i}: {sp.error}\n")
    footer = "".join(errors)
    footer += "# eye_height_vs_bias:" + "".join(
        f" {fmt(b)}={fmt(h)}" for b, h in result.eye_vs_bias()) + "\n"
    footer += f"# rule: {result.rule}\n"
    footer += f"# best: {'none' if result.best is None else result.best}\n"
    return _write(destination, _table(SWEEP_COLUMNS, rows, cfg, footer))


def write_min_power_csv(rows, destination, cfg: Config | None = None) -> int:
    """``rows`` of (bit_rate, Optimum or None); None rows get status ``infeasible``."""
    lines = []
    for rate, opt in rows:
        if opt is None:
            fields = [fmt(np.nan)] * (len(OPTIMUM_COLUMNS) - 3) + ["0", "infeasible"]
        else:
            fields = _point_fields(opt.point, opt.power, opt.eye)
            del fields[3]
            fields.append("ok")
        lines.append([fmt(rate)] + fields)
    return _write(destination, _table(OPTIMUM_COLUMNS, lines, cfg))


def write_bitrate_csv(rates, metrics, cutoff, destination, cfg: Config | None = None) -> int:
    """Eye metrics per bit rate and the ``# max_error_free_bitrate_bps`` footer."""
    rows = [[fmt(r), fmt(m.eye_height), fmt(m.eye_width), fmt(m.q_factor),
             fmt(m.extinction_ratio), fmt(m.ber_estimate), str(int(m.error_free))]
            for r, m in zip(rates, metrics)]
    footer = f"# max_error_free_bitrate_bps: {'none' if cutoff is None else fmt(cutoff)}\n"
    return _write(destination, _table(BITRATE_COLUMNS, rows, cfg, footer))


def read_csv(path) -> tuple[list[str], list[list[str]], list[str]]:
    """Split an output file into (column names, data rows, trailing comment lines)."""
    columns, rows, comments = None, [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            if columns is not None:
                comments.append(line)
            continue
        if columns is None:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    return columns or [], rows, comments


_PLOTS = {
    "photon_density": ("time (s)", "photon density (m^-3)",
                       "plot '{csv}' using 1:3 with lines title 'photon density'"),
    "output_power": ("time (s)", "output power (W)",
                     "plot '{csv}' using 1:7 with lines title 'output power'"),
    "eye": ("time (unit intervals)", "power (W)",
            "plot '{csv}' using 1:2 with dots title 'eye'"),
    "min_power_curve": ("bit rate (bit/s)", "minimum total power (W)",
                        "plot '{csv}' using 1:($16 == 1 ? $10 : NaN) with linespoints "
                        "title 'minimum power'"),
}


def emit_gnuplot(csv_path, kind: str, script_dir=None) -> str:
    """Self-contained gnuplot script plotting ``csv_path`` as ``kind``.

    The CSV is referenced relative to ``script_dir`` (default: its own folder)
    and the script writes a PNG next to it.
    """
    if kind not in _PLOTS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}")
    csv_path = Path(csv_path)
    base = Path(script_dir) if script_dir is not None else csv_path.parent
    rel = Path(os.path.relpath(csv_path, base)).as_posix()
    xlabel, ylabel, plot = _PLOTS[kind]
    png = Path(rel).with_suffix(".png").as_posix()
    return "\n".join([
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set terminal pngcairo size 900,600",
        f"set output '{png}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set grid",
        plot.format(csv=rel),
        "",
    ])
