"""Compiled fixed-step RK4 loop for the carrier/photon/phase rate equations.

The drive current is pre-sampled by the caller on the integration grid
(``i_full[k]`` at ``k*dt`` and ``i_half[k]`` at ``(k + 1/2)*dt``) so the loop
itself never touches Python objects. State updates use compensated
summation, since each increment is many orders below the state and plain
addition would accumulate a rounding bias over millions of steps.
"""
import numpy as np
from numba import njit

OK = 0
NEG_CARRIERS = 1
NEG_PHOTONS = 2


@njit(cache=True, nogil=True)
def rates(n, s, current, q, v_a, g0, n0, eps, tau_n, tau_p, gamma, beta, alpha):
    gain = g0 * (n - n0) / (1.0 + eps * s)
    dn = current / (q * v_a) - gain * s - n / tau_n
    ds = gamma * gain * s - s / tau_p + gamma * beta * n / tau_n
    dphi = 0.5 * alpha * (gamma * g0 * (n - n0) - 1.0 / tau_p)
    return dn, ds, dphi


@njit(cache=True, nogil=True)
def integrate(n, s, phi, comp, i_full, i_half, dt, params, first_record, stride,
              out_n, out_s, out_phi, out_pos):
    """Advance ``len(i_full) - 1`` steps from state (n, s, phi).

    The state before local step ``k`` is recorded into ``out_*`` when
    ``k >= first_record`` and ``(k - first_record) % stride == 0``; the final
    state is left to the caller so chunks never record a point twice.
    ``comp`` holds the running compensation terms and is updated in place.
    Returns ``(status, k_fail, n, s, phi, out_pos)``; on failure the state is
    the last valid one and ``k_fail`` is the step that produced the negative
    value.
    """
    q, v_a, g0, n0, eps, tau_n, tau_p, gamma, beta, alpha = (
        params[0], params[1], params[2], params[3], params[4],
        params[5], params[6], params[7], params[8], params[9])
    n_steps = i_full.shape[0] - 1
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for k in range(n_steps):
        if k >= first_record and (k - first_record) % stride == 0:
            out_n[out_pos] = n
            out_s[out_pos] = s
            out_phi[out_pos] = phi
            out_pos += 1
        ia = i_full[k]
        ib = i_half[k]
        ic = i_full[k + 1]
        k1n, k1s, k1p = rates(n, s, ia, q, v_a, g0, n0, eps, tau_n, tau_p, gamma, beta, alpha)
        k2n, k2s, k2p = rates(n + h2 * k1n, s + h2 * k1s, ib,
                              q, v_a, g0, n0, eps, tau_n, tau_p, gamma, beta, alpha)
        k3n, k3s, k3p = rates(n + h2 * k2n, s + h2 * k2s, ib,
                              q, v_a, g0, n0, eps, tau_n, tau_p, gamma, beta, alpha)
        k4n, k4s, k4p = rates(n + dt * k3n, s + dt * k3s, ic,
                              q, v_a, g0, n0, eps, tau_n, tau_p, gamma, beta, alpha)
        yn = h6 * (k1n + 2.0 * k2n + 2.0 * k3n + k4n) - comp[0]
        ys = h6 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s) - comp[1]
        yp = h6 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) - comp[2]
        n_new = n + yn
        s_new = s + ys
        phi_new = phi + yp
        if not n_new >= 0.0:
            return NEG_CARRIERS, k, n, s, phi, out_pos
        if not s_new >= 0.0:
            return NEG_PHOTONS, k, n, s, phi, out_pos
        comp[0] = (n_new - n) - yn
        comp[1] = (s_new - s) - ys
        comp[2] = (phi_new - phi) - yp
        n, s, phi = n_new, s_new, phi_new
    return OK, -1, n, s, phi, out_pos


def params_array(p) -> np.ndarray:
    return np.array([p.q, p.v_active, p.g0, p.n0, p.eps, p.tau_n, p.tau_p,
                     p.gamma, p.beta, p.alpha], dtype=np.float64)
