"""Eye-diagram signal-quality metrics for a transmitter trace.

Samples are folded modulo two unit intervals using the transmitter's own
bit clock and labelled with the bit that was sent in their slot, so no
threshold decision or clock recovery is involved. Level statistics come from
the central +/-10 % of each unit interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .engine import LinkScenario, Trace, run_batch
from .errors import InsufficientData, MissingLevel
from .waveform import PrbsNrz

DEFAULT_DECISION_Q = 7.03       # Gaussian BER of 1e-12
MIN_BITS = 32
MIN_SAMPLES_PER_UI = 20
MIN_LEVEL_SAMPLES = 8
WINDOW_HALF_WIDTH = 0.1         # fraction of a unit interval around mid-bit
SIGMA_FLOOR = 1e-4              # relative to the level separation


@dataclass
class EyeDiagram:
    """Folded samples: position in [0, 2) unit intervals, power, sent bit."""

    ui_position: np.ndarray
    power: np.ndarray
    bit: np.ndarray
    bit_rate: float
    samples_per_ui: float

    @property
    def unit_interval(self) -> float:
        return 1.0 / self.bit_rate

    def scaled(self, c: float) -> "EyeDiagram":
        return EyeDiagram(self.ui_position, self.power * c, self.bit,
                          self.bit_rate, self.samples_per_ui)


@dataclass(frozen=True)
class EyeMetrics:
    eye_height: float
    eye_width: float
    level_one_mean: float
    level_zero_mean: float
    level_one_std: float
    level_zero_std: float
    q_factor: float
    extinction_ratio: float
    ber_estimate: float
    error_free: bool


def fold_eye(trace: Trace, clock: PrbsNrz, series: str = "output_power") -> EyeDiagram:
    """Fold ``trace`` onto a two-unit-interval eye aligned to ``clock``'s bits."""
    rate = clock.bit_rate
    ui = 1.0 / rate
    t = trace.time
    if len(t) < 2:
        raise InsufficientData("trace has fewer than two samples")
    covered = (t[-1] - t[0]) * rate
    if covered < MIN_BITS:
        raise InsufficientData(f"trace covers {covered:.1f} bit periods, need {MIN_BITS}")
    per_ui = ui / trace.dt_sample
    if per_ui < MIN_SAMPLES_PER_UI * (1 - 1e-9):
        raise InsufficientData(f"{per_ui:.1f} samples per unit interval, need "
                               f"{MIN_SAMPLES_PER_UI}")
    x = t * rate
    slot = np.floor(x).astype(np.int64)
    bits = clock.bits(int(slot.max()) + 1)[slot]
    return EyeDiagram(np.mod(x, 2.0), np.asarray(trace.series(series), dtype=float),
                      bits, rate, per_ui)


def _eye_width(eye: EyeDiagram) -> float:
    """Longest run of phase bins around mid-bit where ones clear all zeros."""
    n_bins = max(int(round(eye.samples_per_ui)), 1)
    frac = np.mod(eye.ui_position, 1.0)
    b = np.minimum((frac * n_bins).astype(np.int64), n_bins - 1)
    ones = eye.bit == 1
    lo1 = np.full(n_bins, np.inf)
    hi0 = np.full(n_bins, -np.inf)
    np.minimum.at(lo1, b[ones], eye.power[ones])
    np.maximum.at(hi0, b[~ones], eye.power[~ones])
    is_open = lo1 > hi0
    centre = n_bins // 2
    if not is_open[centre]:
        return 0.0
    left = centre
    while left > 0 and is_open[left - 1]:
        left -= 1
    right = centre
    while right < n_bins - 1 and is_open[right + 1]:
        right += 1
    return (right - left + 1) / n_bins * eye.unit_interval


def _level_stats(x: np.ndarray) -> tuple[float, float]:
    """Mean and std taken about the first sample, so a flat level is exact."""
    d = x - x[0]
    return float(x[0] + d.mean()), float(d.std())


def eye_metrics(eye: EyeDiagram, decision_q: float = DEFAULT_DECISION_Q) -> EyeMetrics:
    """Level statistics, Q-factor and the error-free decision for ``eye``.

    ``Q = (mu1 - mu0) / (sigma1 + sigma0)`` with the denominator floored at
    ``1e-4 (mu1 - mu0)``: the simulation is noise-free, so a perfectly flat
    eye reports Q = 1e4 rather than infinity.
    """
    frac = np.mod(eye.ui_position, 1.0)
    window = np.abs(frac - 0.5) <= WINDOW_HALF_WIDTH
    ones = eye.power[window & (eye.bit == 1)]
    zeros = eye.power[window & (eye.bit == 0)]
    if len(ones) < MIN_LEVEL_SAMPLES or len(zeros) < MIN_LEVEL_SAMPLES:
        raise MissingLevel(f"need >= {MIN_LEVEL_SAMPLES} mid-bit samples per level, "
                           f"got {len(ones)} ones and {len(zeros)} zeros")
    mu1, sd1 = _level_stats(ones)
    mu0, sd0 = _level_stats(zeros)
    sep = mu1 - mu0
    denom = max(sd1 + sd0, SIGMA_FLOOR * abs(sep))
    q = sep / denom if denom > 0 else 0.0
    ber = min(0.5, 0.5 * float(erfc(q / math.sqrt(2.0))))
    height = max(0.0, float(ones.min() - zeros.max()))
    er = max(1.0, mu1 / max(mu0, np.finfo(float).tiny))
    return EyeMetrics(height, _eye_width(eye), mu1, mu0, sd1, sd0, q, er, ber,
                      bool(q >= decision_q))


def evaluate_eye(scenario: LinkScenario, bit_rate: float | None = None,
                 decision_q: float = DEFAULT_DECISION_Q) -> tuple[EyeDiagram, EyeMetrics]:
    """Run ``scenario`` (optionally at another bit rate) and measure its eye."""
    if bit_rate is not None:
        scenario = scenario.at_bitrate(bit_rate)
    clock = scenario.data_drive
    if clock is None:
        raise InsufficientData("scenario has no PRBS drive to define the bit clock")
    eye = fold_eye(scenario.run(), clock)
    return eye, eye_metrics(eye, decision_q)


def eye_vs_bitrate(scenario: LinkScenario, rates, decision_q: float = DEFAULT_DECISION_Q,
                   max_workers: int | None = None) -> list[EyeMetrics]:
    jobs = [lambda r=r: evaluate_eye(scenario, r, decision_q)[1] for r in rates]
    return run_batch(jobs, max_workers)


def max_error_free_bitrate(scenario: LinkScenario, rates,
                           decision_q: float = DEFAULT_DECISION_Q,
                           max_workers: int | None = None) -> float | None:
    """Largest rate in ``rates`` whose eye is error-free, or None."""
    rates = [float(r) for r in rates]
    if not rates:
        raise ValueError("rates must be non-empty")
    if rates != sorted(rates):
        raise ValueError("rates must be sorted ascending")
    results = eye_vs_bitrate(scenario, rates, decision_q, max_workers)
    passing = [r for r, m in zip(rates, results) if m.error_free]
    return max(passing) if passing else None
