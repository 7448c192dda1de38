"""Rate-equation simulation and power optimisation of an MQW-modulator optical transmitter."""

__version__ = "0.1.0"

from .config import Config, format_config, load_config, parse_config
from .engine import LinkScenario, SimConfig, Trace, run_batch, run_laser, run_link
from .errors import (BelowThreshold, ConfigError, DomainError, Infeasible, InsufficientData,
                     MissingLevel, MqwLinkError, NegativeCarrierDensity, NegativePhotonDensity,
                     NoConvergence, SimulationError)
from .laser import (LaserParams, LaserState, light_current_curve, output_power,
                    relaxation_frequency, rk4_step, steady_state, threshold_current)
from .metrics import (EyeDiagram, EyeMetrics, evaluate_eye, eye_metrics, eye_vs_bitrate,
                      fold_eye, max_error_free_bitrate)
from .modulator import (AbsorptionModel, ModulatorParams, OperatingPoint, PowerBreakdown,
                        contrast_from_il, dynamic_power, il_from_cr, mod_efficiency, modulate,
                        reflectivity, transmitter_power)
from .optimizer import (LinkEvaluator, SweepResult, grid_sweep, min_power_vs_bitrate,
                        minimize_power)
from .output import emit_gnuplot, write_trace_csv
from .waveform import Constant, Piecewise, PrbsNrz, Pulse, Ramp, prbs_bits, sample, sample_array

__all__ = ["__version__", "Config", "format_config", "load_config", "parse_config",
    "LinkScenario", "SimConfig", "Trace", "run_batch", "run_laser", "run_link",
    "BelowThreshold", "ConfigError", "DomainError", "Infeasible", "InsufficientData",
    "MissingLevel", "MqwLinkError", "NegativeCarrierDensity", "NegativePhotonDensity",
    "NoConvergence", "SimulationError", "LaserParams", "LaserState", "light_current_curve",
    "output_power", "relaxation_frequency", "rk4_step", "steady_state",
    "threshold_current", "EyeDiagram", "EyeMetrics", "evaluate_eye", "eye_metrics",
    "eye_vs_bitrate", "fold_eye", "max_error_free_bitrate", "AbsorptionModel",
    "ModulatorParams", "OperatingPoint", "PowerBreakdown", "contrast_from_il",
    "dynamic_power", "il_from_cr", "mod_efficiency", "modulate", "reflectivity",
    "transmitter_power", "LinkEvaluator", "SweepResult", "grid_sweep",
    "min_power_vs_bitrate", "minimize_power", "emit_gnuplot", "write_trace_csv",
    "Constant", "Piecewise", "PrbsNrz", "Pulse", "Ramp", "prbs_bits", "sample",
    "sample_array"]
