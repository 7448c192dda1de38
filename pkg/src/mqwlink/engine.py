"""End-to-end transmitter runs on the fixed RK4 grid.

The laser is integrated from ``initial_state`` at t = 0 with a constant step
``dt``; samples are recorded every ``record_stride`` steps once
``transient_skip`` has elapsed. The recorded laser power is then passed
through the modulator's quasi-static reflectivity.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .errors import (ConfigError, NegativeCarrierDensity, NegativePhotonDensity)
from .laser import LaserParams, LaserState, check_step, output_power
from .modulator import ModulatorParams, modulate
from .waveform import Constant, PrbsNrz, Waveform, sample_array

MAX_STEPS = 10**9
CHUNK_STEPS = 1 << 18
SOURCES = ("laser", "constant_master")

SERIES = ("carrier_density", "photon_density", "phase", "laser_power",
          "modulator_drive", "output_power")


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    dt: float
    record_stride: int = 1
    transient_skip: float = 0.0
    initial_state: LaserState = LaserState()

    def validate(self, p: LaserParams) -> None:
        check_step(self.dt, p)
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigError(f"t_end must be > 0, got {self.t_end!r}", key="t_end_s")
        if not 0 <= self.transient_skip < self.t_end:
            raise ConfigError("transient_skip must lie in [0, t_end)",
                              key="transient_skip_s")
        if self.t_end / self.dt > MAX_STEPS:
            raise ConfigError(f"run needs more than {MAX_STEPS:.0e} steps", key="t_end_s")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ConfigError("record_stride must be an integer >= 1", key="record_stride")
        if self.first_record_step > self.n_steps:
            raise ConfigError("transient_skip lies past the last integration step",
                              key="transient_skip_s")
        n, s, _ = self.initial_state
        if n < 0 or s < 0:
            raise ConfigError("initial densities must be >= 0", key="initial_state")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))

    @property
    def first_record_step(self) -> int:
        return int(math.ceil(self.transient_skip / self.dt - 1e-9))

    @property
    def n_records(self) -> int:
        return (self.n_steps - self.first_record_step) // self.record_stride + 1


def default_dt(p: LaserParams, bit_rate: float | None = None) -> float:
    """min(tau_p/10, 1/(200 B)): at least 200 integration points per bit."""
    dt = p.max_step
    if bit_rate:
        dt = min(dt, 1.0 / (200.0 * bit_rate))
    return dt


def default_transient_skip(p: LaserParams) -> float:
    return 20.0 * p.tau_n


@dataclass
class Trace:
    """Uniformly sampled record of one run."""

    t0: float
    dt_sample: float
    carrier_density: np.ndarray
    photon_density: np.ndarray
    phase: np.ndarray
    laser_power: np.ndarray
    modulator_drive: np.ndarray
    output_power: np.ndarray

    def __len__(self):
        return len(self.carrier_density)

    @property
    def time(self) -> np.ndarray:
        return self.t0 + self.dt_sample * np.arange(len(self))

    def series(self, name: str) -> np.ndarray:
        if name not in SERIES:
            raise KeyError(name)
        return getattr(self, name)


def _integrate(p: LaserParams, drive: Waveform, cfg: SimConfig):
    n_steps = cfg.n_steps
    k_rec = cfg.first_record_step
    stride = int(cfg.record_stride)
    n_rec = cfg.n_records
    out_n = np.empty(n_rec)
    out_s = np.empty(n_rec)
    out_phi = np.empty(n_rec)
    params = _kernel.params_array(p)
    n, s, phi = (float(v) for v in cfg.initial_state)
    comp = np.zeros(3)
    pos = 0
    dt = cfg.dt
    for g0 in range(0, n_steps, CHUNK_STEPS):
        g1 = min(g0 + CHUNK_STEPS, n_steps)
        steps = np.arange(g0, g1 + 1, dtype=np.float64)
        i_full = sample_array(drive, steps * dt)
        i_half = sample_array(drive, (steps[:-1] + 0.5) * dt)
        if i_full.min() < 0 or i_half.min() < 0:
            raise ConfigError("laser drive current must be >= 0", key="drive.laser")
        if g0 >= k_rec:
            first = (-(g0 - k_rec)) % stride
        else:
            first = k_rec - g0
        status, k_fail, n, s, phi, pos = _kernel.integrate(
            n, s, phi, comp, i_full, i_half, dt, params, first, stride,
            out_n, out_s, out_phi, pos)
        if status == _kernel.NEG_CARRIERS:
            raise NegativeCarrierDensity("carrier density went negative; reduce dt",
                                         t=(g0 + k_fail) * dt)
        if status == _kernel.NEG_PHOTONS:
            raise NegativePhotonDensity("photon density went negative; reduce dt",
                                        t=(g0 + k_fail) * dt)
    if pos < n_rec:
        out_n[pos], out_s[pos], out_phi[pos] = n, s, phi
        pos += 1
    assert pos == n_rec
    return out_n, out_s, out_phi


def run_laser(p: LaserParams, drive: Waveform, cfg: SimConfig) -> Trace:
    """Integrate the rate equations under ``drive`` and record a trace.

    ``modulator_drive`` is zero and ``output_power`` equals ``laser_power``.
    """
    cfg.validate(p)
    n, s, phi = _integrate(p, drive, cfg)
    power = output_power(s, p)
    t0 = cfg.first_record_step * cfg.dt
    return Trace(t0, cfg.dt * cfg.record_stride, n, s, phi, power,
                 np.zeros_like(power), power.copy())


def run_link(p: LaserParams, m: ModulatorParams, laser_drive: Waveform,
             mod_drive: Waveform, cfg: SimConfig, source: str = "laser") -> Trace:
    """Laser (or constant master source) followed by the modulator.

    With ``source="constant_master"`` no laser is integrated: the modulator
    input is the constant ``m.p_in`` and the density series are zero.
    """
    if source not in SOURCES:
        raise ConfigError(f"source must be one of {SOURCES}, got {source!r}", key="source")
    if source == "laser":
        trace = run_laser(p, laser_drive, cfg)
    else:
        cfg.validate(p)
        n_rec = cfg.n_records
        zeros = np.zeros(n_rec)
        laser_power = np.full(n_rec, float(m.p_in))
        trace = Trace(cfg.first_record_step * cfg.dt, cfg.dt * cfg.record_stride,
                      zeros, zeros.copy(), zeros.copy(), laser_power,
                      zeros.copy(), laser_power.copy())
    times = trace.time
    trace.modulator_drive = sample_array(mod_drive, times)
    trace.output_power = modulate(trace.laser_power, mod_drive, m.absorption, times)
    return trace


def run_batch(jobs, max_workers: int | None = None) -> list:
    """Evaluate independent zero-argument callables concurrently.

    Results come back in job order regardless of completion order.
    """
    jobs = list(jobs)
    if max_workers == 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class LinkScenario:
    """Device parameters, drives and run settings for one transmitter study.

    ``None`` run settings are filled in per bit rate by ``sim_config``.
    """

    laser: LaserParams = field(default_factory=LaserParams)
    modulator: ModulatorParams = field(default_factory=ModulatorParams)
    laser_drive: Waveform = field(default_factory=lambda: Constant(2e-3))
    mod_drive: Waveform = field(default_factory=lambda: Constant(1.0))
    source: str = "laser"
    t_end: float | None = None
    dt: float | None = None
    record_stride: int | None = None
    transient_skip: float | None = None
    eye_bits: int = 127
    initial_state: LaserState = LaserState()

    @property
    def data_drive(self) -> PrbsNrz | None:
        """The PRBS drive that defines the bit clock (modulator first)."""
        for w in (self.mod_drive, self.laser_drive):
            if isinstance(w, PrbsNrz):
                return w
        return None

    @property
    def bit_rate(self) -> float | None:
        d = self.data_drive
        return d.bit_rate if d is not None else None

    def at_bitrate(self, bit_rate: float) -> "LinkScenario":
        """Copy with every PRBS drive switched to ``bit_rate``."""
        changes = {}
        for name in ("laser_drive", "mod_drive"):
            w = getattr(self, name)
            if isinstance(w, PrbsNrz):
                changes[name] = dataclasses.replace(w, bit_rate=float(bit_rate))
        return dataclasses.replace(self, **changes)

    def with_seed(self, seed: int) -> "LinkScenario":
        changes = {}
        for name in ("laser_drive", "mod_drive"):
            w = getattr(self, name)
            if isinstance(w, PrbsNrz):
                changes[name] = dataclasses.replace(w, seed=int(seed))
        return dataclasses.replace(self, **changes)

    def sim_config(self) -> SimConfig:
        rate = self.bit_rate
        dt = self.dt if self.dt is not None else default_dt(self.laser, rate)
        skip = (self.transient_skip if self.transient_skip is not None
                else default_transient_skip(self.laser))
        if self.t_end is not None:
            t_end = self.t_end
        elif rate:
            t_end = skip + self.eye_bits / rate
        else:
            t_end = skip + 10e-9
        if self.record_stride is not None:
            stride = self.record_stride
        elif rate:
            # keep roughly 200 recorded samples per bit
            stride = max(1, int(1.0 / (200.0 * rate * dt)))
        else:
            stride = 1
        return SimConfig(t_end, dt, stride, skip, self.initial_state)

    def run(self) -> Trace:
        return run_link(self.laser, self.modulator, self.laser_drive,
                        self.mod_drive, self.sim_config(), self.source)
