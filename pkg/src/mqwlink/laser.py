"""Single-mode quantum-well laser rate equations.

Carrier density ``n`` (m^-3), photon density ``s`` (m^-3) and optical phase
``phi`` (rad) evolve as::

    dn/dt   = I/(q V_a) - g0 (n - N0)/(1 + eps s) s - n/tau_n
    ds/dt   = Gamma g0 (n - N0)/(1 + eps s) s - s/tau_p + Gamma beta n/tau_n
    dphi/dt = alpha/2 [Gamma g0 (n - N0) - 1/tau_p]

and the emitted power is ``P = s eta_sp h nu V_a / (2 Gamma tau_p)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (BelowThreshold, ConfigError, NegativeCarrierDensity,
                     NegativePhotonDensity, NoConvergence)
from .waveform import Waveform, sample

ELECTRON_CHARGE = 1.602176634e-19   # C
PLANCK = 6.62607015e-34             # J s
SPEED_OF_LIGHT = 299792458.0        # m/s

MAX_BISECTION_STEPS = 1_000_000
STEADY_STATE_RTOL = 1e-9


def photon_energy_from_wavelength(lambda_nm: float) -> float:
    """Photon energy h c / lambda in joules."""
    if not lambda_nm > 0:
        raise ConfigError("wavelength must be > 0", key="lambda_nm")
    return PLANCK * SPEED_OF_LIGHT / (lambda_nm * 1e-9)


@dataclass(frozen=True)
class LaserParams:
    """Rate-equation coefficients, all SI.

    The defaults describe a generic 850 nm InGaAs/AlGaAs/GaAs quantum-well
    laser with a threshold near 0.67 mA. They are representative magnitudes,
    not measured values of any particular device; gain compression is set
    on the strong side so the relaxation ringing is well damped.
    """

    v_active: float = 1.0e-17       # active volume, m^3
    g0: float = 1.0e-11             # differential gain, m^3/s
    n0: float = 1.0e24              # reference (transparency) density, m^-3
    eps: float = 2.0e-22            # gain compression, m^3
    tau_n: float = 3.0e-9           # carrier lifetime, s
    tau_p: float = 2.0e-12          # photon lifetime, s
    gamma: float = 0.2              # confinement factor
    beta: float = 1.0e-4            # spontaneous-emission coupling
    alpha: float = 3.0              # linewidth enhancement factor
    eta_sp: float = 0.5             # output efficiency
    photon_energy: float = field(
        default_factory=lambda: photon_energy_from_wavelength(850.0))
    v_drop: float = 1.5             # diode forward drop for wall-plug power, V
    q: float = field(default=ELECTRON_CHARGE, init=False)

    def __post_init__(self):
        for key in ("v_active", "g0", "n0", "tau_n", "tau_p", "photon_energy"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"must be a finite value > 0, got {value!r}", key=key)
        for key in ("eps", "alpha", "v_drop"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"must be a finite value >= 0, got {value!r}", key=key)
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"must lie in (0, 1], got {self.gamma!r}", key="gamma")
        if not 0 <= self.beta <= 1:
            raise ConfigError(f"must lie in [0, 1], got {self.beta!r}", key="beta")
        if not 0 < self.eta_sp <= 1:
            raise ConfigError(f"must lie in (0, 1], got {self.eta_sp!r}", key="eta_sp")

    @property
    def max_step(self) -> float:
        """Largest admissible RK4 step, tau_p / 10."""
        return self.tau_p / 10.0


class LaserState(NamedTuple):
    n: float = 0.0      # carrier density, m^-3
    s: float = 0.0      # photon density, m^-3
    phi: float = 0.0    # optical phase, rad


def derivatives(state: LaserState, current: float, p: LaserParams) -> tuple[float, float, float]:
    """Time derivatives (dn/dt, ds/dt, dphi/dt) at ``state`` under ``current``."""
    n, s, _ = state
    gain = p.g0 * (n - p.n0) / (1.0 + p.eps * s)
    dn = current / (p.q * p.v_active) - gain * s - n / p.tau_n
    ds = p.gamma * gain * s - s / p.tau_p + p.gamma * p.beta * n / p.tau_n
    dphi = 0.5 * p.alpha * (p.gamma * p.g0 * (n - p.n0) - 1.0 / p.tau_p)
    return dn, ds, dphi


def check_step(dt: float, p: LaserParams) -> None:
    if not (dt > 0 and math.isfinite(dt)):
        raise ConfigError(f"step must be > 0, got {dt!r}", key="dt_s")
    if dt > p.max_step * (1 + 1e-12):
        raise ConfigError(f"step {dt:.3e} s exceeds tau_p/10 = {p.max_step:.3e} s",
                          key="dt_s")


def rk4_step(state: LaserState, drive: Waveform, t: float, dt: float,
             p: LaserParams) -> LaserState:
    """One classical RK4 step from ``t`` to ``t + dt``.

    The drive is sampled at ``t``, ``t + dt/2`` and ``t + dt``. A negative
    carrier or photon density afterwards means ``dt`` is too coarse for this
    trajectory and raises instead of being clamped.
    """
    check_step(dt, p)
    ia = sample(drive, t)
    ib = sample(drive, t + 0.5 * dt)
    ic = sample(drive, t + dt)
    h2 = 0.5 * dt
    n, s, phi = state
    k1 = derivatives(state, ia, p)
    k2 = derivatives((n + h2 * k1[0], s + h2 * k1[1], 0.0), ib, p)
    k3 = derivatives((n + h2 * k2[0], s + h2 * k2[1], 0.0), ib, p)
    k4 = derivatives((n + dt * k3[0], s + dt * k3[1], 0.0), ic, p)
    h6 = dt / 6.0
    n_new = n + h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    s_new = s + h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    phi_new = phi + h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    if not n_new >= 0:
        raise NegativeCarrierDensity("carrier density went negative; reduce dt", t=t)
    if not s_new >= 0:
        raise NegativePhotonDensity("photon density went negative; reduce dt", t=t)
    return LaserState(n_new, s_new, phi_new)


def output_power(s, p: LaserParams):
    """Emitted optical power (W) for photon density ``s`` (scalar or array)."""
    return s * p.eta_sp * p.photon_energy * p.v_active / (2.0 * p.gamma * p.tau_p)


def threshold_density(p: LaserParams) -> float:
    return p.n0 + 1.0 / (p.gamma * p.g0 * p.tau_p)


def threshold_current(p: LaserParams) -> float:
    """Threshold current estimate q V_a N_th / tau_n (beta = 0, eps = 0)."""
    return p.q * p.v_active * threshold_density(p) / p.tau_n


def _photons_from_balance(n: float, p: LaserParams) -> float:
    """Non-negative root of ds/dt = 0 for given n (inf if none is finite)."""
    g = p.gamma * p.g0 * (n - p.n0)
    a = p.gamma * p.beta * n / p.tau_n
    c = p.eps / p.tau_p
    # c s^2 - b s - a = 0
    b = g - 1.0 / p.tau_p + a * p.eps
    if c == 0.0:
        if b < 0:
            return a / -b
        # gain at or above loss: no finite s unless both sides vanish
        return 0.0 if a == 0.0 and b == 0.0 else math.inf
    disc = math.sqrt(b * b + 4.0 * c * a)
    if b > 0:
        return (b + disc) / (2.0 * c)
    if a == 0.0:
        return 0.0
    return 2.0 * a / (disc - b)


def _relative_residuals(n: float, s: float, current: float, p: LaserParams):
    gain = p.g0 * (n - p.n0) / (1.0 + p.eps * s)
    t_n = (current / (p.q * p.v_active), gain * s, n / p.tau_n)
    t_s = (p.gamma * gain * s, s / p.tau_p, p.gamma * p.beta * n / p.tau_n)
    r_n = t_n[0] - t_n[1] - t_n[2]
    r_s = t_s[0] - t_s[1] + t_s[2]
    scale_n = max(abs(v) for v in t_n)
    scale_s = max(abs(v) for v in t_s)
    rel_n = abs(r_n) / scale_n if scale_n > 0 else 0.0
    rel_s = abs(r_s) / scale_s if scale_s > 0 else 0.0
    return rel_n, rel_s


def steady_state(p: LaserParams, current: float) -> LaserState:
    """Fixed point of the carrier and photon equations under constant current.

    The photon density is eliminated through ds/dt = 0 and the remaining
    carrier balance is bisected in ``n``. The returned phase is 0 since the
    phase equation has no fixed point.
    """
    if not current >= 0:
        raise ConfigError(f"current must be >= 0, got {current!r}", key="current")
    pump = current / (p.q * p.v_active)

    def carrier_balance(n):
        s = _photons_from_balance(n, p)
        if math.isinf(s):
            return -math.inf
        return pump - p.g0 * (n - p.n0) / (1.0 + p.eps * s) * s - n / p.tau_n

    lo = 0.0
    hi = current * p.tau_n / (p.q * p.v_active)
    if hi == 0.0:
        if carrier_balance(0.0) == 0.0:
            return LaserState(0.0, 0.0, 0.0)
        hi = p.n0
    # reabsorption below transparency can push the root past I tau_n/(q V_a)
    while carrier_balance(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e40:
            raise NoConvergence("could not bracket the steady-state carrier density")
    steps = 0
    while steps < MAX_BISECTION_STEPS:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if carrier_balance(mid) > 0:
            lo = mid
        else:
            hi = mid
        steps += 1

    best = None
    for n in (lo, hi):
        candidates = [_photons_from_balance(n, p)]
        # at the gain-clamped point the carrier equation pins s more accurately
        if n != p.n0:
            x = (pump - n / p.tau_n) / (p.g0 * (n - p.n0))
            if x >= 0 and p.eps * x < 1:
                candidates.append(x / (1.0 - p.eps * x))
        for s in candidates:
            if not math.isfinite(s) or s < 0:
                continue
            err = max(_relative_residuals(n, s, current, p))
            if best is None or err < best[0]:
                best = (err, n, s)
    if best is None or best[0] > STEADY_STATE_RTOL:
        err = best[0] if best else math.inf
        raise NoConvergence(
            f"steady state residual {err:.3e} exceeds {STEADY_STATE_RTOL:g} "
            f"at I = {current:.6e} A")
    return LaserState(best[1], best[2], 0.0)


def relaxation_frequency(p: LaserParams, current: float) -> float:
    """Small-signal relaxation-oscillation frequency (Hz), (1/2pi) sqrt(g0 S/tau_p)."""
    i_th = threshold_current(p)
    if current <= i_th:
        raise BelowThreshold(f"I = {current:.4e} A is not above threshold "
                             f"I_th = {i_th:.4e} A")
    s = steady_state(p, current).s
    return math.sqrt(p.g0 * s / p.tau_p) / (2.0 * math.pi)


def light_current_curve(p: LaserParams, currents) -> np.ndarray:
    """Steady-state photon density for each current."""
    return np.array([steady_state(p, float(i)).s for i in currents])
