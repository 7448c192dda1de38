"""Minimum-power search over the transmitter design space.

A candidate is an ``OperatingPoint`` (laser bias, modulator insertion loss
and the contrast it implies, bit rate, modulator voltages). It is feasible
when its eye is error-free; among feasible points the lowest total power
wins, ties going to the smaller IL and then the smaller bias current.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .engine import LinkScenario, Trace, run_batch, run_link
from .errors import ConfigError, Infeasible, MqwLinkError
from .metrics import DEFAULT_DECISION_Q, EyeMetrics, eye_metrics, fold_eye
from .modulator import (AbsorptionModel, OperatingPoint, PowerBreakdown,
                        transmitter_power)
from .waveform import Constant, PrbsNrz, sample_array

AXES = ("bias_current", "il", "bit_rate", "v_bias", "v_dd")
MAX_GRID = 10**6
CACHE_SIZE = 64
FEASIBILITY_RULE = "error_free; min total power; tie -> lower il, lower bias_current"
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class SweepPoint:
    values: dict
    point: OperatingPoint | None = None
    power: PowerBreakdown | None = None
    eye: EyeMetrics | None = None
    error: str | None = None

    @property
    def feasible(self) -> bool:
        return self.error is None and self.eye is not None and self.eye.error_free

    def rank_key(self):
        return (self.power.total, self.point.il, self.point.bias_current)


@dataclass
class SweepResult:
    points: list
    best: int | None
    rule: str = FEASIBILITY_RULE

    @property
    def best_point(self) -> SweepPoint | None:
        return None if self.best is None else self.points[self.best]

    def eye_vs_bias(self) -> list[tuple[float, float]]:
        """Mean eye height per bias current over the successful points."""
        groups: dict[float, list[float]] = {}
        for sp in self.points:
            if sp.eye is not None:
                groups.setdefault(sp.point.bias_current, []).append(sp.eye.eye_height)
        return [(b, float(np.mean(h))) for b, h in sorted(groups.items())]


def select_best(points) -> int | None:
    """Index of the feasible minimum under the fixed tie-break."""
    best = None
    for i, sp in enumerate(points):
        if sp.feasible and (best is None or sp.rank_key() < points[best].rank_key()):
            best = i
    return best


def grid_sweep(axes: dict, evaluator: Callable, max_workers: int | None = None) -> SweepResult:
    """Evaluate the Cartesian product of ``axes`` (row-major, first axis slowest).

    ``evaluator(values)`` gets a dict of axis values and returns
    ``(OperatingPoint, PowerBreakdown, EyeMetrics)``. A point whose evaluation
    raises is kept with its error message and never selected.
    """
    names = list(axes)
    lists = [list(axes[n]) for n in names]
    if any(len(v) == 0 for v in lists):
        raise ConfigError("every sweep axis needs at least one value", key="sweep")
    size = math.prod(len(v) for v in lists)
    if size > MAX_GRID:
        raise ConfigError(f"sweep grid has {size} points, limit is {MAX_GRID}", key="sweep")

    def job(values):
        def run():
            try:
                point, power, eye = evaluator(values)
            except MqwLinkError as exc:
                return SweepPoint(values, error=f"{type(exc).__name__}: {exc}")
            return SweepPoint(values, point, power, eye)
        return run

    combos = [dict(zip(names, combo)) for combo in itertools.product(*lists)]
    points = run_batch([job(v) for v in combos], max_workers)
    return SweepResult(points, select_best(points))


class LinkEvaluator:
    """Evaluates operating points of a link scenario.

    The laser output for a given laser drive is simulated once and reused
    for every IL (a bounded LRU cache); the modulator is rebuilt per point in closed form,
    as a two-entry absorption table with ``alpha_min = -ln(1 - IL)/L`` at the
    transmitting voltage ``V_bias - V_dd`` and ``K alpha_min`` at ``V_bias``.
    Unspecified axes default to the scenario's bit rate and the modulator's
    voltages.
    """

    def __init__(self, scenario: LinkScenario, decision_q: float = DEFAULT_DECISION_Q):
        if not isinstance(scenario.laser_drive, (PrbsNrz, Constant)):
            raise ConfigError("optimisation needs a constant or PRBS laser drive",
                              key="drive.laser")
        self.scenario = scenario
        self.decision_q = decision_q
        self._lock = threading.Lock()
        self._laser_cache: OrderedDict = OrderedDict()
        self._drive_cache: OrderedDict = OrderedDict()
        self.simulations = 0

    def defaults(self) -> dict:
        m = self.scenario.modulator
        return {"bit_rate": self.scenario.bit_rate, "v_bias": m.v_bias, "v_dd": m.v_dd}

    def point_scenario(self, point: OperatingPoint) -> LinkScenario:
        """Full scenario realising ``point``; used directly for spot checks."""
        sc = self.scenario.at_bitrate(point.bit_rate)
        clock = sc.data_drive
        ld = sc.laser_drive
        if isinstance(ld, PrbsNrz):
            half = 0.5 * (ld.high - ld.low)
            if point.bias_current - abs(half) < 0:
                raise ConfigError(f"bias {point.bias_current:.4g} A is below half the "
                                  f"current swing", key="bias_current")
            ld = dataclasses.replace(ld, low=point.bias_current - half,
                                     high=point.bias_current + half)
        else:
            ld = Constant(point.bias_current)
        if point.v_dd <= 0:
            raise ConfigError("closed-form modulator needs v_dd > 0", key="v_dd")
        v_on, v_off = point.v_bias - point.v_dd, point.v_bias
        md = dataclasses.replace(clock, low=v_off, high=v_on)
        k = sc.modulator.k_ratio
        absorption = AbsorptionModel.from_il_k(point.il, k, v_on, v_off,
                                               sc.modulator.absorption.length)
        mod = dataclasses.replace(sc.modulator, absorption=absorption,
                                  v_bias=point.v_bias, v_dd=point.v_dd)
        return dataclasses.replace(sc, laser=sc.laser, modulator=mod,
                                   laser_drive=ld, mod_drive=md)

    def _cached(self, cache: OrderedDict, key, compute):
        with self._lock:
            if key in cache:
                cache.move_to_end(key)
                return cache[key]
        value = compute()
        with self._lock:
            cache[key] = value
            while len(cache) > CACHE_SIZE:
                cache.popitem(last=False)
        return value

    def _laser_power(self, sc: LinkScenario):
        def compute():
            trace = run_link(sc.laser, sc.modulator, sc.laser_drive, Constant(0.0),
                             sc.sim_config(), sc.source)
            with self._lock:
                self.simulations += 1
            return trace.t0, trace.dt_sample, trace.laser_power

        key = (sc.laser_drive, sc.sim_config())
        return self._cached(self._laser_cache, key, compute)

    def __call__(self, values: dict):
        vals = {**self.defaults(), **values}
        k = self.scenario.modulator.k_ratio
        point = OperatingPoint.make(vals["bias_current"], vals["il"], k, vals["bit_rate"],
                                    vals["v_bias"], vals["v_dd"])
        sc = self.point_scenario(point)
        t0, dt_sample, laser_power = self._laser_power(sc)
        zeros = np.zeros_like(laser_power)
        trace = Trace(t0, dt_sample, zeros, zeros, zeros, laser_power, zeros, zeros)
        v = self._cached(self._drive_cache, (sc.mod_drive, t0, dt_sample, len(zeros)),
                         lambda: sample_array(sc.mod_drive, trace.time))
        absorption = sc.modulator.absorption
        trace.modulator_drive = v
        trace.output_power = laser_power * np.exp(-absorption.alpha(v) * absorption.length)
        eye = eye_metrics(fold_eye(trace, sc.data_drive), self.decision_q)
        power = transmitter_power(point, sc.laser, sc.modulator,
                                  p_in=float(np.mean(laser_power)))
        return point, power, eye

    def objective(self, bias: float, il: float, **fixed) -> tuple[float, tuple | None]:
        """Total power, or +inf when infeasible or failing."""
        try:
            result = self({"bias_current": bias, "il": il, **fixed})
        except MqwLinkError:
            return math.inf, None
        point, power, eye = result
        if not eye.error_free:
            return math.inf, result
        return power.total, result


def golden_section(f, a: float, b: float, tol: float):
    """Golden-section minimisation of ``f`` on [a, b]; returns the best (x, f(x)) seen."""
    seen = []

    def g(x):
        y = f(x)
        seen.append((y, x))
        return y

    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = g(c), g(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = g(d)
    y, x = min(seen)
    return x, y


def _refine_1d(f, grid: np.ndarray, i_best: int, tol: float, fallback_points: int = 33):
    """Refine around ``grid[i_best]`` by golden section inside the neighbouring cells.

    Golden section needs the bracket's interior point to be no worse than its
    ends; if that check fails the bracket is scanned on a dense grid instead.
    """
    lo = grid[max(i_best - 1, 0)]
    hi = grid[min(i_best + 1, len(grid) - 1)]
    if hi <= lo:
        return grid[i_best], f(grid[i_best])
    f_mid = f(grid[i_best])
    f_lo = f(lo) if i_best > 0 else math.inf
    f_hi = f(hi) if i_best < len(grid) - 1 else math.inf
    candidates = [(f_mid, grid[i_best])]
    if f_mid <= min(f_lo, f_hi):
        x, y = golden_section(f, lo, hi, tol * (grid[-1] - grid[0]))
    else:
        xs = np.linspace(lo, hi, fallback_points)
        ys = [f(x) for x in xs]
        j = int(np.argmin(ys))
        x, y = xs[j], ys[j]
    candidates.append((y, x))
    y, x = min(candidates)
    return x, y


@dataclass
class Optimum:
    point: OperatingPoint
    power: PowerBreakdown
    eye: EyeMetrics
    coarse: SweepResult = field(repr=False)


def minimize_power(evaluator: LinkEvaluator, bit_rate: float, bounds: dict,
                   points_per_axis: int = 16, tol: float = 1e-3,
                   max_workers: int | None = None) -> Optimum:
    """Lowest-power error-free operating point at ``bit_rate``.

    A coarse bias x IL grid locates the best cell; golden-section search then
    refines the bias (outer) and, for each trial bias, the IL (inner, also
    bracketed by the coarse grid) to ``tol`` of each axis span.
    """
    (b_lo, b_hi), (il_lo, il_hi) = bounds["bias_current"], bounds["il"]
    if not (b_lo <= b_hi and il_lo <= il_hi):
        raise ConfigError("bounds must be (low, high) with low <= high", key="bounds")
    fixed = {k: v for k, v in bounds.items() if k not in ("bias_current", "il")}
    fixed = {k: (v[0] if isinstance(v, (tuple, list)) else v) for k, v in fixed.items()}
    fixed["bit_rate"] = bit_rate
    biases = np.linspace(b_lo, b_hi, points_per_axis)
    ils = np.linspace(il_lo, il_hi, points_per_axis)
    coarse = grid_sweep({"bias_current": biases, "il": ils, **{k: [v] for k, v in fixed.items()}},
                        evaluator, max_workers)
    if coarse.best is None:
        raise Infeasible(f"no error-free point on the coarse grid at {bit_rate:.4g} bit/s")
    best_sp = coarse.points[coarse.best]
    i_bias = int(np.argmin(np.abs(biases - best_sp.point.bias_current)))

    memo = {}

    def inner(bias):
        if bias in memo:
            return memo[bias]
        costs = [evaluator.objective(bias, il, **fixed)[0] for il in ils]
        j = int(np.argmin(costs))
        if math.isinf(costs[j]):
            memo[bias] = (math.inf, None)
            return memo[bias]
        il, y = _refine_1d(lambda x: evaluator.objective(bias, x, **fixed)[0], ils, j, tol)
        memo[bias] = (y, il)
        return memo[bias]

    bias, _ = _refine_1d(lambda b: inner(b)[0], biases, i_bias, tol)
    y, il = inner(bias)
    candidates = [(best_sp.rank_key(), best_sp.point, best_sp.power, best_sp.eye)]
    if il is not None:
        total, result = evaluator.objective(bias, il, **fixed)
        if result is not None and math.isfinite(total):
            point, power, eye = result
            candidates.append(((power.total, point.il, point.bias_current), point, power, eye))
    _, point, power, eye = min(candidates, key=lambda c: c[0])
    return Optimum(point, power, eye, coarse)


def min_power_vs_bitrate(evaluator: LinkEvaluator, rates, bounds: dict,
                         points_per_axis: int = 16, tol: float = 1e-3,
                         max_workers: int | None = None) -> list:
    """``(bit_rate, Optimum or None)`` per rate; None marks an infeasible rate."""
    rates = [float(r) for r in rates]
    if rates != sorted(rates):
        raise ValueError("rates must be sorted ascending")
    rows = []
    for r in rates:
        try:
            rows.append((r, minimize_power(evaluator, r, bounds, points_per_axis, tol,
                                           max_workers)))
        except Infeasible:
            rows.append((r, None))
    return rows
