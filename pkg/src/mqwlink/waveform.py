"""Deterministic drive signals for the laser current and the modulator voltage.

Every waveform is an immutable value; ``sample`` evaluates it at a single time
and ``sample_array`` at many times at once (the integrator uses the latter to
pre-sample the drive on its fixed grid).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import ConfigError

# Right-shifting Fibonacci LFSR: feedback = bit0 ^ bit(n - m) for x^n + x^m + 1.
PRBS_TAPS = {7: 6, 15: 14, 23: 18, 31: 28}


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ConfigError(f"must be finite, got {value!r}", key=name)


@dataclass(frozen=True)
class Constant:
    level: float

    def __post_init__(self):
        _check_finite(level=self.level)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.full(np.shape(t), float(self.level))


@dataclass(frozen=True)
class Pulse:
    """Trapezoidal pulse on a baseline.

    The rising edge starts at ``t_start`` and lasts ``t_rise``; the flat top
    then holds for ``width``; the falling edge lasts ``t_fall``.
    """

    base: float
    amplitude: float
    t_start: float
    width: float
    t_rise: float = 0.0
    t_fall: float = 0.0

    def __post_init__(self):
        _check_finite(base=self.base, amplitude=self.amplitude,
                      t_start=self.t_start, width=self.width,
                      t_rise=self.t_rise, t_fall=self.t_fall)
        if self.width <= 0:
            raise ConfigError("pulse width must be > 0", key="width")
        if self.t_rise < 0 or self.t_fall < 0:
            raise ConfigError("pulse edge durations must be >= 0", key="t_rise")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        t_top = self.t_start + self.t_rise
        t_end_top = t_top + self.width
        t_stop = t_end_top + self.t_fall
        env = np.zeros_like(t)
        env = np.where((t >= t_top) & (t <= t_end_top), 1.0, env)
        if self.t_rise > 0:
            rising = (t > self.t_start) & (t < t_top)
            env = np.where(rising, (t - self.t_start) / self.t_rise, env)
        if self.t_fall > 0:
            falling = (t > t_end_top) & (t < t_stop)
            env = np.where(falling, (t_stop - t) / self.t_fall, env)
        return self.base + self.amplitude * env


@dataclass(frozen=True)
class Ramp:
    base: float
    slope: float
    t_start: float = 0.0

    def __post_init__(self):
        _check_finite(base=self.base, slope=self.slope, t_start=self.t_start)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.base + self.slope * np.maximum(t - self.t_start, 0.0)


@dataclass(frozen=True)
class PrbsNrz:
    """NRZ line code of a maximal-length PRBS.

    Bit ``k`` occupies ``[k/bit_rate, (k+1)/bit_rate)``; a zero maps to
    ``low`` and a one to ``high``. Transitions are linear ramps of duration
    ``t_edge`` centred on the bit boundaries, so the middle of every bit is
    always the settled level.
    """

    bit_rate: float
    register_length: int = 7
    seed: int = 1
    low: float = 0.0
    high: float = 1.0
    t_edge: float = 0.0

    def __post_init__(self):
        _check_finite(bit_rate=self.bit_rate, low=self.low, high=self.high,
                      t_edge=self.t_edge)
        if self.bit_rate <= 0:
            raise ConfigError("bit rate must be > 0", key="bit_rate")
        _validate_prbs(self.register_length, self.seed)
        if self.t_edge < 0 or self.t_edge >= 1.0 / self.bit_rate:
            raise ConfigError(
                f"t_edge must lie in [0, 1/bit_rate) = [0, {1.0 / self.bit_rate:.3e}) s",
                key="t_edge")

    @property
    def unit_interval(self) -> float:
        return 1.0 / self.bit_rate

    def bits(self, n: int) -> np.ndarray:
        return prbs_bits(self.register_length, self.seed, n)

    def levels(self, bits: np.ndarray) -> np.ndarray:
        return np.where(bits.astype(bool), self.high, self.low)

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = t * self.bit_rate
        slot = np.floor(x).astype(np.int64)
        slot = np.maximum(slot, 0)
        n_needed = int(slot.max(initial=0)) + 2
        lev = self.levels(self.bits(n_needed))
        out = lev[slot]
        if self.t_edge > 0:
            # nearest boundary k; the k = 0 boundary has no predecessor
            k = np.rint(x).astype(np.int64)
            half = 0.5 * self.t_edge * self.bit_rate
            offset = x - k
            ramp = (np.abs(offset) < half) & (k >= 1)
            if np.any(ramp):
                kk = k[ramp]
                before = lev[kk - 1]
                after = lev[kk]
                frac = (offset[ramp] + half) / (2.0 * half)
                out = out.copy()
                out[ramp] = before + (after - before) * frac
        return out


@dataclass(frozen=True)
class Piecewise:
    """Linear interpolation between samples, clamped outside the time range."""

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(v) for v in self.times)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if len(times) < 2 or len(times) != len(values):
            raise ConfigError("piecewise waveform needs >= 2 (time, value) pairs "
                              "of equal length", key="times")
        if any(not math.isfinite(v) for v in times + values):
            raise ConfigError("piecewise samples must be finite", key="times")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("piecewise times must be strictly increasing",
                              key="times")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(t, dtype=float), self.times, self.values)


Waveform = Union[Constant, Pulse, Ramp, PrbsNrz, Piecewise]


def sample(w: Waveform, t: float) -> float:
    """Value of ``w`` at time ``t``."""
    return float(w.evaluate(np.asarray([t], dtype=float))[0])


def sample_array(w: Waveform, t) -> np.ndarray:
    """Vectorised ``sample`` over an array of times."""
    return np.asarray(w.evaluate(np.asarray(t, dtype=float)), dtype=float)


def waveform_bounds(w: Waveform) -> tuple[float, float]:
    """Smallest and largest value the waveform can take."""
    if isinstance(w, Constant):
        return w.level, w.level
    if isinstance(w, Pulse):
        top = w.base + w.amplitude
        return min(w.base, top), max(w.base, top)
    if isinstance(w, PrbsNrz):
        return min(w.low, w.high), max(w.low, w.high)
    if isinstance(w, Piecewise):
        return min(w.values), max(w.values)
    if isinstance(w, Ramp):
        if w.slope > 0:
            return w.base, math.inf
        if w.slope < 0:
            return -math.inf, w.base
        return w.base, w.base
    raise TypeError(f"not a waveform: {w!r}")


def replace(w: Waveform, **changes) -> Waveform:
    return dataclasses.replace(w, **changes)


def _validate_prbs(register_length: int, seed: int) -> None:
    if register_length not in PRBS_TAPS:
        raise ConfigError(f"register length must be one of {sorted(PRBS_TAPS)}, "
                          f"got {register_length}", key="register_length")
    if not 1 <= seed <= (1 << register_length) - 1:
        raise ConfigError(f"seed must lie in [1, 2^{register_length} - 1], got {seed}",
                          key="seed")


@lru_cache(maxsize=64)
def _lfsr_block(register_length: int, seed: int, n: int) -> np.ndarray:
    tap = register_length - PRBS_TAPS[register_length]
    top = register_length - 1
    state = seed
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        out[i] = state & 1
        fb = (state ^ (state >> tap)) & 1
        state = (state >> 1) | (fb << top)
    out.setflags(write=False)
    return out


def prbs_bits(register_length: int, seed: int, n: int) -> np.ndarray:
    """First ``n`` output bits of a maximal-length LFSR.

    Taps follow x^7+x^6+1, x^15+x^14+1, x^23+x^18+1 and x^31+x^28+1. The
    register shifts right and the emitted bit is the LSB before the shift.
    """
    _validate_prbs(register_length, seed)
    if n < 0:
        raise ConfigError("bit count must be >= 0", key="n")
    period = (1 << register_length) - 1
    if n <= period:
        # round up so neighbouring requests share one cached block
        block = min(period, 1 << max(n - 1, 1).bit_length())
        return _lfsr_block(register_length, seed, block)[:n].copy()
    one_period = _lfsr_block(register_length, seed, period)
    return np.resize(one_period, n)
