"""INI-style run configuration.

Grammar: ``[section]`` headers, ``key = value`` lines, ``#`` comments (whole
line, or after whitespace at the end of a line). Keys are case-sensitive and
carry their SI unit as a suffix (``_s``, ``_a``, ``_v``, ``_f``, ``_m3``,
``_nm`` ...). Lists are comma separated or ``start:stop:count`` (inclusive
linspace). ``auto`` leaves a run setting to be derived from the bit rate.

Unknown sections or keys are errors, so typos never pass silently. The
fully resolved configuration (defaults included) can be echoed with
``format_config`` and parsed back to an identical ``Config``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import LinkScenario
from .errors import ConfigError
from .laser import LaserParams, LaserState, photon_energy_from_wavelength
from .modulator import AbsorptionModel, ModulatorParams
from .waveform import Constant, Piecewise, PrbsNrz, Pulse, Ramp

AUTO = "auto"
DEFAULT_RATES = (1e9, 2e9, 4e9, 8e9, 12e9, 16e9, 20e9)


class _Float:
    def __init__(self, allow_auto=False):
        self.allow_auto = allow_auto

    def parse(self, text):
        if self.allow_auto and text == AUTO:
            return None
        value = float(text)
        if not math.isfinite(value):
            raise ValueError("not finite")
        return value

    def format(self, value):
        return AUTO if value is None else repr(float(value))


class _Int(_Float):
    def parse(self, text):
        if self.allow_auto and text == AUTO:
            return None
        return int(text, 0)

    def format(self, value):
        return AUTO if value is None else str(int(value))


class _Str:
    def __init__(self, choices=None):
        self.choices = choices

    def parse(self, text):
        if self.choices is not None and text not in self.choices:
            raise ValueError(f"expected one of {', '.join(self.choices)}")
        return text

    def format(self, value):
        return value


class _FloatList:
    def parse(self, text):
        if re.fullmatch(r"[^,:]+:[^,:]+:\s*\d+\s*", text):
            lo, hi, n = text.split(":")
            values = np.linspace(float(lo), float(hi), int(n)).tolist()
        else:
            values = [float(v) for v in text.split(",")]
        if not values or not all(math.isfinite(v) for v in values):
            raise ValueError("need finite numbers")
        return tuple(values)

    def format(self, value):
        return ", ".join(repr(float(v)) for v in value)


F, FA, I, IA, S, L = _Float(), _Float(True), _Int(), _Int(True), _Str(), _FloatList()

_LASER_DEFAULTS = LaserParams()
_MOD_DEFAULTS = ModulatorParams()

# config key -> (type, default, LaserParams field)
LASER_KEYS = {
    "v_active_m3": (F, _LASER_DEFAULTS.v_active, "v_active"),
    "g0_m3_per_s": (F, _LASER_DEFAULTS.g0, "g0"),
    "n0_per_m3": (F, _LASER_DEFAULTS.n0, "n0"),
    "eps_m3": (F, _LASER_DEFAULTS.eps, "eps"),
    "tau_n_s": (F, _LASER_DEFAULTS.tau_n, "tau_n"),
    "tau_p_s": (F, _LASER_DEFAULTS.tau_p, "tau_p"),
    "gamma": (F, _LASER_DEFAULTS.gamma, "gamma"),
    "beta": (F, _LASER_DEFAULTS.beta, "beta"),
    "alpha": (F, _LASER_DEFAULTS.alpha, "alpha"),
    "eta_sp": (F, _LASER_DEFAULTS.eta_sp, "eta_sp"),
    "lambda_nm": (F, 850.0, "photon_energy"),
    "v_drop_v": (F, _LASER_DEFAULTS.v_drop, "v_drop"),
}

MODULATOR_KEYS = {
    "k_ratio": (F, _MOD_DEFAULTS.k_ratio, "k_ratio"),
    "responsivity_a_per_w": (F, _MOD_DEFAULTS.responsivity, "responsivity"),
    "v_bias_v": (F, _MOD_DEFAULTS.v_bias, "v_bias"),
    "v_dd_v": (F, _MOD_DEFAULTS.v_dd, "v_dd"),
    "c_mod_f": (F, _MOD_DEFAULTS.c_mod, "c_mod"),
    "p_in_w": (F, _MOD_DEFAULTS.p_in, "p_in"),
    "activity": (F, _MOD_DEFAULTS.activity, "activity"),
    "length_m": (F, _MOD_DEFAULTS.absorption.length, "length"),
    "absorption_csv": (S, "", "absorption"),
}

SIM_KEYS = {
    "t_end_s": (FA, None),
    "dt_s": (FA, None),
    "record_stride": (IA, None),
    "transient_skip_s": (FA, None),
    "source": (_Str(("laser", "constant_master")), "laser"),
    "eye_bits": (I, 127),
    "initial_n_per_m3": (F, 0.0),
    "initial_s_per_m3": (F, 0.0),
    "initial_phi_rad": (F, 0.0),
}

METRICS_KEYS = {
    "decision_q": (F, 7.03),
    "rates_bps": (L, DEFAULT_RATES),
}

SWEEP_KEYS = {
    "bias_current_a": (L, tuple(np.linspace(2e-3, 6e-3, 11).tolist())),
    "il": (L, tuple(np.linspace(0.05, 0.55, 11).tolist())),
    "bit_rate_bps": (L, None),
    "v_bias_v": (L, None),
    "v_dd_v": (L, None),
    "points_per_axis": (I, 16),
    "tol": (F, 1e-3),
}

SWEEP_AXES = {"bias_current_a": "bias_current", "il": "il", "bit_rate_bps": "bit_rate",
              "v_bias_v": "v_bias", "v_dd_v": "v_dd"}

WAVEFORM_KINDS = ("constant", "pulse", "ramp", "prbs", "piecewise")


def _drive_keys(unit: str, kind: str, defaults: dict) -> dict:
    """Keys of one waveform kind; ``unit`` is 'a' (current) or 'v' (voltage)."""
    u = unit
    table = {
        "constant": {f"level_{u}": F},
        "pulse": {f"base_{u}": F, f"amplitude_{u}": F, "t_start_s": F, "width_s": F,
                  "t_rise_s": F, "t_fall_s": F},
        "ramp": {f"base_{u}": F, f"slope_{u}_per_s": F, "t_start_s": F},
        "prbs": {"bit_rate_bps": F, "register_length": I, "seed": I, f"low_{u}": F,
                 f"high_{u}": F, "t_edge_s": F},
        "piecewise": {"times_s": L, f"values_{u}": L},
    }[kind]
    return {k: (t, defaults.get(k)) for k, t in table.items()}


def _laser_drive_defaults() -> dict:
    return {"level_a": 2e-3,
            "base_a": 1e-3, "amplitude_a": 0.5e-3, "t_start_s": 61e-9, "width_s": 1e-9,
            "t_rise_s": 0.0, "t_fall_s": 0.0, "slope_a_per_s": 1e5,
            "bit_rate_bps": 10e9, "register_length": 7, "seed": 127,
            "low_a": 2.7e-3, "high_a": 5.3e-3, "t_edge_s": 10e-12}


def _mod_drive_defaults(v_bias: float, v_dd: float, rate: float, seed: int,
                        register_length: int) -> dict:
    return {"level_v": v_bias - v_dd,
            "base_v": v_bias - v_dd, "amplitude_v": v_dd, "t_start_s": 60e-9,
            "width_s": 1e-9, "t_rise_s": 0.0, "t_fall_s": 0.0, "slope_v_per_s": 1e8,
            "bit_rate_bps": rate, "register_length": register_length, "seed": seed,
            "low_v": v_bias, "high_v": v_bias - v_dd, "t_edge_s": 10e-12}


SECTION_ORDER = ("laser", "modulator", "drive.laser", "drive.modulator", "sim", "sweep",
                 "metrics")

_LINE_SECTION = re.compile(r"^\[\s*([A-Za-z0-9_.]+)\s*\]$")
_LINE_KEY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")
_INLINE_COMMENT = re.compile(r"\s+#.*$")


@dataclass(frozen=True)
class Config:
    """Resolved configuration: ``sections[name][key]`` with defaults filled in."""

    sections: dict
    base_dir: str = field(default=".", compare=False)

    def __getitem__(self, section):
        return self.sections[section]

    def laser_params(self) -> LaserParams:
        return _build(self, "laser")

    def modulator_params(self) -> ModulatorParams:
        return _build(self, "modulator")

    def laser_drive(self):
        return _build(self, "drive.laser")

    def mod_drive(self):
        return _build(self, "drive.modulator")

    def with_prbs(self, seed: int | None = None, bit_rate: float | None = None) -> "Config":
        """Copy with the PRBS drives' seed and/or bit rate overridden."""
        sections = {k: dict(v) for k, v in self.sections.items()}
        for name in ("drive.laser", "drive.modulator"):
            d = sections[name]
            if d["kind"] == "prbs":
                if seed is not None:
                    d["seed"] = int(seed)
                if bit_rate is not None:
                    d["bit_rate_bps"] = float(bit_rate)
        cfg = Config(sections, self.base_dir)
        cfg.laser_drive()
        cfg.mod_drive()
        return cfg

    def scenario(self, seed: int | None = None, bit_rate: float | None = None) -> LinkScenario:
        sim = self["sim"]
        initial = LaserState(sim["initial_n_per_m3"], sim["initial_s_per_m3"],
                             sim["initial_phi_rad"])
        sc = LinkScenario(self.laser_params(), self.modulator_params(), self.laser_drive(),
                          self.mod_drive(), sim["source"], sim["t_end_s"], sim["dt_s"],
                          sim["record_stride"], sim["transient_skip_s"], sim["eye_bits"],
                          initial)
        if seed is not None:
            sc = sc.with_seed(seed)
        if bit_rate is not None:
            sc = sc.at_bitrate(bit_rate)
        return sc

    def sweep_axes(self, scenario: LinkScenario) -> dict:
        sw = self["sweep"]
        m = scenario.modulator
        fallback = {"bit_rate_bps": (scenario.bit_rate,), "v_bias_v": (m.v_bias,),
                    "v_dd_v": (m.v_dd,)}
        axes = {}
        for key, name in SWEEP_AXES.items():
            values = sw[key] if sw[key] is not None else fallback.get(key)
            if values is None or values[0] is None:
                raise ConfigError("no bit rate to sweep: set bit_rate_bps", key="bit_rate_bps")
            axes[name] = values
        return axes

    def bounds(self) -> dict:
        sw = self["sweep"]
        return {"bias_current": (min(sw["bias_current_a"]), max(sw["bias_current_a"])),
                "il": (min(sw["il"]), max(sw["il"]))}


def _build(cfg: Config, section: str):
    values = cfg.sections[section]
    try:
        if section == "laser":
            kwargs = {f: values[k] for k, (_, _, f) in LASER_KEYS.items()}
            kwargs["photon_energy"] = photon_energy_from_wavelength(values["lambda_nm"])
            return LaserParams(**kwargs)
        if section == "modulator":
            path = values["absorption_csv"]
            if path:
                p = Path(path)
                if not p.is_absolute():
                    p = Path(cfg.base_dir) / p
                if not p.exists():
                    raise ConfigError(f"absorption table {str(p)!r} not found",
                                      key="absorption_csv")
                absorption = AbsorptionModel.from_csv(p, values["length_m"])
            else:
                absorption = AbsorptionModel(length=values["length_m"])
            kwargs = {f: values[k] for k, (_, _, f) in MODULATOR_KEYS.items()
                      if f not in ("absorption", "length")}
            return ModulatorParams(absorption=absorption, **kwargs)
        if section.startswith("drive."):
            return _build_waveform(values, "a" if section == "drive.laser" else "v")
    except ConfigError as exc:
        key = _config_key(section, exc.key, values)
        raise ConfigError(exc.message, key=key) from None
    raise KeyError(section)


def _config_key(section: str, field_name, values: dict):
    """Config key that produced the object field ``field_name``."""
    if field_name is None:
        return section
    table = {"laser": LASER_KEYS, "modulator": MODULATOR_KEYS}.get(section, {})
    for key, spec in table.items():
        if spec[2] == field_name:
            return key
    for suffix in ("", "_s", "_bps", "_a", "_v", "_csv"):
        if field_name + suffix in values:
            return field_name + suffix
    return f"{section}.{field_name}"


def _build_waveform(v: dict, u: str):
    kind = v["kind"]
    if kind == "constant":
        return Constant(v[f"level_{u}"])
    if kind == "pulse":
        return Pulse(v[f"base_{u}"], v[f"amplitude_{u}"], v["t_start_s"], v["width_s"],
                     v["t_rise_s"], v["t_fall_s"])
    if kind == "ramp":
        return Ramp(v[f"base_{u}"], v[f"slope_{u}_per_s"], v["t_start_s"])
    if kind == "prbs":
        return PrbsNrz(v["bit_rate_bps"], v["register_length"], v["seed"], v[f"low_{u}"],
                       v[f"high_{u}"], v["t_edge_s"])
    if v["times_s"] is None or v[f"values_{u}"] is None:
        raise ConfigError("piecewise drive needs times_s and values", key="times_s")
    return Piecewise(v["times_s"], v[f"values_{u}"])


def _lex(text: str) -> dict:
    """section -> {key: (raw value, line number)}."""
    raw: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        stripped = _INLINE_COMMENT.sub("", stripped)
        m = _LINE_SECTION.match(stripped)
        if m:
            section = m.group(1)
            if section not in SECTION_ORDER:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            raw.setdefault(section, {})
            continue
        m = _LINE_KEY.match(stripped)
        if not m:
            raise ConfigError(f"cannot parse {line.strip()!r}", line=lineno)
        if section is None:
            raise ConfigError("key outside of any [section]", key=m.group(1), line=lineno)
        key, value = m.group(1), m.group(2).strip()
        if key in raw[section]:
            raise ConfigError("duplicate key", key=key, line=lineno)
        raw[section][key] = (value, lineno)
    return raw


def _resolve(section: str, schema: dict, raw: dict) -> dict:
    unknown = [k for k in raw if k not in schema]
    if unknown:
        key = min(unknown, key=lambda k: raw[k][1])
        raise ConfigError(f"unknown key in [{section}]", key=key, line=raw[key][1])
    out = {}
    for key, spec in schema.items():
        kind, default = spec[0], spec[1]
        if key in raw:
            text, lineno = raw[key]
            try:
                out[key] = kind.parse(text)
            except ValueError as exc:
                raise ConfigError(f"invalid value {text!r} ({exc})", key=key,
                                  line=lineno) from None
        else:
            out[key] = default
    return out


def parse_config(text: str, base_dir: str | Path = ".") -> Config:
    """Parse configuration text into a fully resolved, validated ``Config``."""
    raw = _lex(text)
    sections = {}
    sections["laser"] = _resolve("laser", LASER_KEYS, raw.get("laser", {}))
    sections["modulator"] = _resolve("modulator", MODULATOR_KEYS, raw.get("modulator", {}))

    ld_raw = dict(raw.get("drive.laser", {}))
    kind = _parse_kind(ld_raw, "prbs")
    ld = _resolve("drive.laser", _drive_keys("a", kind, _laser_drive_defaults()), ld_raw)
    sections["drive.laser"] = {"kind": kind, **ld}

    m = sections["modulator"]
    rate = ld.get("bit_rate_bps", 10e9)
    seed = ld.get("seed", 127)
    reg = ld.get("register_length", 7)
    md_raw = dict(raw.get("drive.modulator", {}))
    kind = _parse_kind(md_raw, "prbs")
    md = _resolve("drive.modulator",
                  _drive_keys("v", kind, _mod_drive_defaults(m["v_bias_v"], m["v_dd_v"],
                                                             rate, seed, reg)),
                  md_raw)
    sections["drive.modulator"] = {"kind": kind, **md}
    sections["sim"] = _resolve("sim", SIM_KEYS, raw.get("sim", {}))
    sections["sweep"] = _resolve("sweep", SWEEP_KEYS, raw.get("sweep", {}))
    sections["metrics"] = _resolve("metrics", METRICS_KEYS, raw.get("metrics", {}))
    cfg = Config(sections, str(base_dir))
    _validate(cfg, raw)
    return cfg


def _parse_kind(raw: dict, default: str) -> str:
    if "kind" not in raw:
        return default
    text, lineno = raw.pop("kind")
    if text not in WAVEFORM_KINDS:
        raise ConfigError(f"unknown waveform kind {text!r}", key="kind", line=lineno)
    return text


def _validate(cfg: Config, raw: dict) -> None:
    def line_of(section, key):
        entry = raw.get(section, {}).get(key)
        return entry[1] if entry else None

    for section in ("laser", "modulator", "drive.laser", "drive.modulator"):
        try:
            obj = _build(cfg, section)
        except ConfigError as exc:
            raise ConfigError(exc.message, key=exc.key,
                              line=line_of(section, exc.key)) from None
        if section == "laser":
            laser = obj
    ld, md = cfg.laser_drive(), cfg.mod_drive()
    if isinstance(ld, PrbsNrz) and isinstance(md, PrbsNrz):
        for attr in ("bit_rate", "register_length", "seed"):
            if getattr(ld, attr) != getattr(md, attr):
                raise ConfigError(f"laser and modulator PRBS drives must share {attr}",
                                  key="drive.modulator")
    sim = cfg["sim"]
    for key in ("t_end_s", "dt_s", "transient_skip_s"):
        v = sim[key]
        if v is not None and (v < 0 or (key != "transient_skip_s" and v == 0)):
            raise ConfigError("must be > 0", key=key, line=line_of("sim", key))
    if sim["dt_s"] is not None and sim["dt_s"] > laser.max_step * (1 + 1e-12):
        raise ConfigError(f"exceeds tau_p/10 = {laser.max_step:.3e} s", key="dt_s",
                          line=line_of("sim", "dt_s"))
    if sim["record_stride"] is not None and sim["record_stride"] < 1:
        raise ConfigError("must be >= 1", key="record_stride",
                          line=line_of("sim", "record_stride"))
    if sim["eye_bits"] < 1:
        raise ConfigError("must be >= 1", key="eye_bits", line=line_of("sim", "eye_bits"))
    if min(sim["initial_n_per_m3"], sim["initial_s_per_m3"]) < 0:
        raise ConfigError("initial densities must be >= 0", key="initial_n_per_m3")
    sw = cfg["sweep"]
    if sw["points_per_axis"] < 2:
        raise ConfigError("must be >= 2", key="points_per_axis",
                          line=line_of("sweep", "points_per_axis"))
    if not 0 < sw["tol"] < 1:
        raise ConfigError("must lie in (0, 1)", key="tol", line=line_of("sweep", "tol"))
    if min(sw["bias_current_a"]) < 0:
        raise ConfigError("must be >= 0", key="bias_current_a",
                          line=line_of("sweep", "bias_current_a"))
    if not all(0 <= v < 1 for v in sw["il"]):
        raise ConfigError("IL values must lie in [0, 1)", key="il", line=line_of("sweep", "il"))
    if sw["bit_rate_bps"] is not None and min(sw["bit_rate_bps"]) <= 0:
        raise ConfigError("must be > 0", key="bit_rate_bps",
                          line=line_of("sweep", "bit_rate_bps"))
    rates = cfg["metrics"]["rates_bps"]
    if min(rates) <= 0 or list(rates) != sorted(rates):
        raise ConfigError("rates must be positive and ascending", key="rates_bps",
                          line=line_of("metrics", "rates_bps"))


def _schema_for(cfg: Config, section: str) -> dict:
    if section == "laser":
        return LASER_KEYS
    if section == "modulator":
        return MODULATOR_KEYS
    if section == "sim":
        return SIM_KEYS
    if section == "sweep":
        return SWEEP_KEYS
    if section == "metrics":
        return METRICS_KEYS
    unit = "a" if section == "drive.laser" else "v"
    return _drive_keys(unit, cfg.sections[section]["kind"], {})


def format_config(cfg: Config) -> str:
    """Resolved configuration in the input grammar (round-trips via ``parse_config``)."""
    lines = []
    for section in SECTION_ORDER:
        lines.append(f"[{section}]")
        values = cfg.sections[section]
        if section.startswith("drive."):
            lines.append(f"kind = {values['kind']}")
        for key, spec in _schema_for(cfg, section).items():
            value = values[key]
            if value is None:
                if isinstance(spec[0], _FloatList) or not getattr(spec[0], "allow_auto", False):
                    continue
            lines.append(f"{key} = {spec[0].format(value)}".rstrip())
    return "\n".join(lines) + "\n"


def config_header(cfg: Config) -> str:
    """``#``-prefixed echo of the resolved config for output files."""
    body = "".join(f"# {line}\n" for line in format_config(cfg).splitlines())
    return "# # mqwlink resolved configuration\n" + body


def config_from_header(text: str, base_dir: str | Path = ".") -> Config:
    """Recover the ``Config`` echoed at the top of an output file."""
    lines = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        lines.append(line[2:] if line.startswith("# ") else line[1:])
    return parse_config("\n".join(lines), base_dir)


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", key=str(path)) from None
    return parse_config(text, path.parent)
