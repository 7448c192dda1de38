"""Reflective MQW electroabsorption modulator.

Optical transfer is quasi-static: the reflectivity at drive voltage ``v`` is
``exp(-alpha(v) L)`` with ``alpha(v)`` interpolated from an absorption table.
The contrast/insertion-loss trade-off for an absorption ratio
``K = alpha_max/alpha_min`` is ``CR = (1 - IL)^(1 - K)``.

Electrical power has a static part (photocurrent times bias, averaged over
the two binary states) and a dynamic ``activity C V_dd^2 B`` switching part.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError
from .laser import output_power, steady_state
from .waveform import Waveform, sample_array

log = logging.getLogger(__name__)

# SYNTHETIC absorption table: monotone QCSE-like rise of absorption with
# reverse bias. Not measured data for any real well stack.
SYNTHETIC_VOLTAGES = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
SYNTHETIC_ALPHAS = (0.8e5, 0.9e5, 1.0e5, 2.2e5, 4.0e5, 5.0e5, 5.5e5)
SYNTHETIC_LENGTH = 2.0e-6


@dataclass(frozen=True)
class AbsorptionModel:
    """Absorption coefficient (1/m) versus reverse voltage, plus path length (m)."""

    voltages: tuple = SYNTHETIC_VOLTAGES
    alphas: tuple = SYNTHETIC_ALPHAS
    length: float = SYNTHETIC_LENGTH

    def __post_init__(self):
        v = tuple(float(x) for x in self.voltages)
        a = tuple(float(x) for x in self.alphas)
        object.__setattr__(self, "voltages", v)
        object.__setattr__(self, "alphas", a)
        if len(v) < 2 or len(v) != len(a):
            raise ConfigError("absorption table needs >= 2 rows of (voltage, alpha)",
                              key="absorption")
        if not all(math.isfinite(x) for x in v + a):
            raise ConfigError("absorption table entries must be finite", key="absorption")
        if any(b <= c for b, c in zip(v[1:], v)):
            raise ConfigError("table voltages must be strictly increasing", key="absorption")
        if any(x < 0 for x in a):
            raise ConfigError("absorption coefficients must be >= 0", key="absorption")
        if any(b < c for b, c in zip(a[1:], a)):
            raise ConfigError("absorption must be non-decreasing with voltage",
                              key="absorption")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ConfigError("interaction length must be > 0", key="length_m")

    @classmethod
    def from_il_k(cls, il: float, k: float, v_on: float, v_off: float,
                  length: float = SYNTHETIC_LENGTH) -> "AbsorptionModel":
        """Two-point table realising insertion loss ``il`` and ratio ``k``.

        ``v_on`` (less absorbing) must be below ``v_off``.
        """
        if not 0 <= il < 1:
            raise DomainError(f"IL must lie in [0, 1), got {il!r}")
        if k < 1:
            raise DomainError(f"K must be >= 1, got {k!r}")
        alpha_min = -math.log1p(-il) / length
        return cls((v_on, v_off), (alpha_min, k * alpha_min), length)

    @classmethod
    def from_csv(cls, source, length: float = SYNTHETIC_LENGTH) -> "AbsorptionModel":
        """Read a ``voltage_v,alpha_per_m`` CSV (header required, ``#`` comments allowed)."""
        if isinstance(source, (str, Path)) and Path(source).exists():
            text = Path(source).read_text()
        else:
            text = str(source)
        rows = [line for line in io.StringIO(text) if line.strip()
                and not line.lstrip().startswith("#")]
        reader = csv.reader(rows)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["voltage_v", "alpha_per_m"]:
            raise ConfigError("absorption CSV header must be 'voltage_v,alpha_per_m'",
                              key="absorption_csv")
        volts, alphas = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                v, a = (float(x) for x in row)
            except ValueError:
                raise ConfigError(f"bad absorption row {row!r}", key="absorption_csv",
                                  line=lineno) from None
            volts.append(v)
            alphas.append(a)
        return cls(tuple(volts), tuple(alphas), length)

    def alpha(self, v):
        return np.interp(v, self.voltages, self.alphas)

    @property
    def k_ratio(self) -> float:
        """alpha_max / alpha_min over the table."""
        lo, hi = self.alphas[0], self.alphas[-1]
        return math.inf if lo == 0 else hi / lo


def reflectivity(v, m: AbsorptionModel):
    """Reflectivity exp(-alpha(v) L); voltages outside the table clamp."""
    r = np.exp(-m.alpha(v) * m.length)
    return float(r) if np.ndim(r) == 0 else r


def contrast_from_il(il: float, k: float) -> float:
    """Contrast ratio (1 - IL)^(1 - K)."""
    if not 0 <= il < 1:
        raise DomainError(f"IL must lie in [0, 1), got {il!r}")
    if not k >= 1:
        raise DomainError(f"K must be >= 1, got {k!r}")
    return (1.0 - il) ** (1.0 - k)


def il_from_cr(cr: float, k: float) -> float:
    """Insertion loss that yields contrast ``cr``; inverse of ``contrast_from_il``."""
    if not cr >= 1:
        raise DomainError(f"CR must be >= 1, got {cr!r}")
    if cr == 1:
        return 0.0
    if not k > 1:
        raise DomainError(f"CR = {cr} is unreachable with K = {k}")
    return 1.0 - cr ** (1.0 / (1.0 - k))


@dataclass(frozen=True)
class ModulatorParams:
    absorption: AbsorptionModel = field(default_factory=AbsorptionModel)
    k_ratio: float = 4.0            # alpha_max/alpha_min for closed-form sweeps
    responsivity: float = 0.5       # A/W
    v_bias: float = 2.0             # pre-bias (reverse) voltage, V
    v_dd: float = 1.0               # supply swing, V
    c_mod: float = 50e-15           # modulator + driver capacitance, F
    p_in: float = 1e-3              # constant master-laser power, W
    activity: float = 0.5

    def __post_init__(self):
        checks = {
            "k_ratio": self.k_ratio >= 1,
            "responsivity": 0 < self.responsivity <= 1.3,
            "v_bias": self.v_bias >= 0,
            "v_dd": self.v_dd >= 0,
            "c_mod": self.c_mod >= 0,
            "p_in": self.p_in >= 0,
            "activity": 0 <= self.activity <= 1,
        }
        for key, ok in checks.items():
            value = getattr(self, key)
            if not (ok and math.isfinite(value)):
                raise ConfigError(f"invalid value {value!r}", key=key)

    @property
    def v_on(self) -> float:
        """Reverse voltage of the transmitting ("one") state."""
        return self.v_bias - self.v_dd

    @property
    def v_off(self) -> float:
        return self.v_bias


def modulate(input_power: np.ndarray, drive: Waveform, m: AbsorptionModel,
             times: np.ndarray) -> np.ndarray:
    """Output power ``input_power[i] * reflectivity(drive(times[i]))``."""
    input_power = np.asarray(input_power, dtype=float)
    r = np.exp(-m.alpha(sample_array(drive, times)) * m.length)
    return input_power * r


class ModEfficiency(NamedTuple):
    eta_mod: float
    static_power: float
    nonphysical: bool       # eta_mod < 0, i.e. V_dd > V_bias made a term negative


def mod_efficiency(il: float, cr: float, m: ModulatorParams,
                   p_in: float | None = None) -> ModEfficiency:
    """Static modulator dissipation factor.

    ``eta = 0.5 R [IL (V_bias - V_dd) + (1 - (1 - IL)/CR) V_bias]`` and the
    static power is ``eta * P_in``. ``cr`` may be ``math.inf``.
    """
    if not 0 <= il < 1:
        raise DomainError(f"IL must lie in [0, 1), got {il!r}")
    if not cr >= 1:
        raise DomainError(f"CR must be >= 1, got {cr!r}")
    p_in = m.p_in if p_in is None else p_in
    eta = 0.5 * m.responsivity * (il * (m.v_bias - m.v_dd)
                                  + (1.0 - (1.0 - il) / cr) * m.v_bias)
    eta = float(eta)
    nonphysical = eta < 0
    if nonphysical:
        log.warning("negative modulator efficiency %.4g (V_dd=%g > V_bias=%g)",
                    eta, m.v_dd, m.v_bias)
    return ModEfficiency(eta, float(eta * p_in), nonphysical)


def dynamic_power(m: ModulatorParams, bit_rate: float) -> float:
    """Switching power activity * C * V_dd^2 * bit_rate."""
    if not bit_rate > 0:
        raise DomainError(f"bit rate must be > 0, got {bit_rate!r}")
    return m.activity * m.c_mod * m.v_dd ** 2 * bit_rate


@dataclass(frozen=True)
class OperatingPoint:
    bias_current: float
    il: float
    cr: float
    bit_rate: float
    v_bias: float
    v_dd: float

    @classmethod
    def make(cls, bias_current, il, k, bit_rate, v_bias, v_dd) -> "OperatingPoint":
        return cls(float(bias_current), float(il), float(contrast_from_il(il, k)),
                   float(bit_rate), float(v_bias), float(v_dd))

    def __post_init__(self):
        if not 0 <= self.il < 1:
            raise DomainError(f"IL must lie in [0, 1), got {self.il!r}")
        if not self.bias_current >= 0:
            raise DomainError(f"bias current must be >= 0, got {self.bias_current!r}")


@dataclass(frozen=True)
class PowerBreakdown:
    static_power: float
    dynamic_power: float
    laser_wall_power: float
    total: float
    eta_mod: float
    nonphysical: bool = False


def transmitter_power(point: OperatingPoint, laser, m: ModulatorParams,
                      p_in: float | None = None) -> PowerBreakdown:
    """Total transmitter power at ``point``.

    ``p_in`` is the optical power reaching the modulator; by default the
    laser's steady-state output at the bias current.
    """
    mod = dataclasses.replace(m, v_bias=point.v_bias, v_dd=point.v_dd)
    if p_in is None:
        p_in = float(output_power(steady_state(laser, point.bias_current).s, laser))
    eff = mod_efficiency(point.il, point.cr, mod, p_in)
    dyn = dynamic_power(mod, point.bit_rate)
    wall = float(laser.v_drop * point.bias_current)
    return PowerBreakdown(eff.static_power, dyn, wall, eff.static_power + dyn + wall,
                          eff.eta_mod, eff.nonphysical)
