"""Command-line entry point: ``mqwlink <command> --config FILE ...``.

Exit codes: 0 success, 2 configuration or usage error, 3 simulation
failure, 4 infeasible optimisation.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import Config, load_config
from .engine import run_laser
from .errors import ConfigError, Infeasible, MqwLinkError, SimulationError
from .metrics import eye_vs_bitrate, evaluate_eye
from .optimizer import LinkEvaluator, grid_sweep, min_power_vs_bitrate
from .output import (emit_gnuplot, write_bitrate_csv, write_eye_csv, write_min_power_csv,
                     write_sweep_csv, write_trace_csv)

log = logging.getLogger("mqwlink")

EXIT_OK, EXIT_CONFIG, EXIT_SIMULATION, EXIT_INFEASIBLE = 0, 2, 3, 4

PLOT_KIND = {"laser-sim": "photon_density", "link-sim": "output_power", "eye": "eye",
             "optimize": "min_power_curve"}


def _gbps_list(text: str) -> list[float]:
    try:
        values = [float(v) * 1e9 for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated Gbit/s values, got {text!r}")
    if not values or min(values) <= 0:
        raise argparse.ArgumentTypeError("bit rates must be positive")
    return values


def _gbps(text: str) -> float:
    values = _gbps_list(text)
    if len(values) != 1:
        raise argparse.ArgumentTypeError("expected a single bit rate")
    return values[0]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--plot", action="store_true", default=argparse.SUPPRESS,
                        help="also write a gnuplot script next to the CSV")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="override the PRBS seed")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="print nothing but errors")

    parser = argparse.ArgumentParser(prog="mqwlink", parents=[common],
                                     description="MQW laser + modulator transmitter simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_text, out_required=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--config", required=True, type=Path, help="INI configuration file")
        p.add_argument("--out", required=out_required, type=Path, help="output CSV path")
        return p

    command("laser-sim", "laser rate equations under the laser drive")
    command("link-sim", "laser followed by the modulator")
    command("eye", "eye diagram and metrics at one bit rate").add_argument(
        "--bitrate", required=True, type=_gbps, help="bit rate in Gbit/s")
    command("sweep", "grid sweep over the [sweep] axes")
    command("optimize", "minimum-power operating point").add_argument(
        "--bitrate", required=True, type=_gbps_list, help="bit rate(s) in Gbit/s, comma list")
    command("max-bitrate", "largest error-free bit rate", out_required=False).add_argument(
        "--rates", required=True, type=_gbps_list, help="comma list of bit rates in Gbit/s")
    return parser


def _emit(args, text: str) -> None:
    if not args.quiet:
        print(text)


def _plot(args, out: Path) -> None:
    if not args.plot:
        return
    kind = PLOT_KIND.get(args.command)
    if kind is None:
        log.warning("no plot kind for %s; skipping --plot", args.command)
        return
    script = out.with_suffix(".gp")
    script.write_bytes(emit_gnuplot(out, kind).encode("ascii"))
    _emit(args, f"wrote {script}")


def run(args) -> int:
    cfg: Config = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_prbs(seed=args.seed)
    decision_q = cfg["metrics"]["decision_q"]
    cmd = args.command

    if cmd == "laser-sim":
        sc = cfg.scenario()
        trace = run_laser(sc.laser, sc.laser_drive, sc.sim_config())
        write_trace_csv(trace, args.out, cfg)
        _emit(args, f"wrote {len(trace.time)} samples to {args.out}")
    elif cmd == "link-sim":
        trace = cfg.scenario().run()
        write_trace_csv(trace, args.out, cfg)
        _emit(args, f"wrote {len(trace.time)} samples to {args.out}")
    elif cmd == "eye":
        cfg = cfg.with_prbs(bit_rate=args.bitrate)
        eye, m = evaluate_eye(cfg.scenario(), decision_q=decision_q)
        write_eye_csv(eye, m, args.out, cfg)
        _emit(args, f"eye height {m.eye_height:.6e} W, Q {m.q_factor:.4g}, "
                    f"extinction {m.extinction_ratio:.4g}, BER {m.ber_estimate:.3e}, "
                    f"error-free {'yes' if m.error_free else 'no'}")
    elif cmd == "sweep":
        sc = cfg.scenario()
        result = grid_sweep(cfg.sweep_axes(sc), LinkEvaluator(sc, decision_q))
        write_sweep_csv(result, args.out, cfg)
        best = result.best_point
        _emit(args, f"{len(result.points)} points, best: "
                    + ("none" if best is None else
                       f"row {result.best}, total {best.power.total:.6e} W"))
    elif cmd == "optimize":
        ev = LinkEvaluator(cfg.scenario(), decision_q)
        sw = cfg["sweep"]
        rows = min_power_vs_bitrate(ev, sorted(args.bitrate), cfg.bounds(),
                                    sw["points_per_axis"], sw["tol"])
        write_min_power_csv(rows, args.out, cfg)
        for rate, opt in rows:
            _emit(args, f"{rate / 1e9:g} Gbit/s: " + (
                "infeasible" if opt is None else
                f"total {opt.power.total:.6e} W at bias {opt.point.bias_current:.6e} A, "
                f"IL {opt.point.il:.6f}"))
        if any(opt is None for _, opt in rows):
            log.error("no error-free operating point for some bit rates")
            _plot(args, args.out)
            return EXIT_INFEASIBLE
    elif cmd == "max-bitrate":
        rates = args.rates
        if rates != sorted(rates):
            raise ConfigError("rates must be ascending", key="--rates")
        metrics = eye_vs_bitrate(cfg.scenario(), rates, decision_q)
        passing = [r for r, m in zip(rates, metrics) if m.error_free]
        cutoff = max(passing) if passing else None
        if args.out is not None:
            write_bitrate_csv(rates, metrics, cutoff, args.out, cfg)
        for r, m in zip(rates, metrics):
            _emit(args, f"{r / 1e9:g} Gbit/s: eye height {m.eye_height:.6e} W, "
                        f"Q {m.q_factor:.4g}, error-free {'yes' if m.error_free else 'no'}")
        _emit(args, "max error-free bit rate: "
                    + ("none" if cutoff is None else f"{cutoff / 1e9:g} Gbit/s"))
    if args.out is not None:
        _plot(args, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("plot", False), ("seed", None), ("quiet", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="mqwlink: %(message)s")
    try:
        return run(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SimulationError as exc:
        log.error("simulation failed: %s", exc)
        return EXIT_SIMULATION
    except Infeasible as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except MqwLinkError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
