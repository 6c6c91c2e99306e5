"""Compiled radial-grid kernels for the time loop.

These repeat the scalar reduction used by :func:`flow.rhs_phi` on radial
grids, node by node, so that one SSP-RK3 step costs a few microseconds.  The
pure-numpy path in :mod:`flow` is the reference; tests compare the two.

Status codes: 0 ok, 1 spacelike guard, 2 mean-convexity guard.
"""

import math

import numpy as np
from numba import njit

OK = 0
SPACELIKE = 1
MEAN_CONVEXITY = 2


@njit(cache=True)
def radial_rate(u, h, coth, n, rescaled, eps_h, eps_sp, out):
    N = u.shape[0]
    inv2h = 0.5 / h
    invh2 = 1.0 / (h * h)
    for i in range(N):
        um = u[i - 1] if i > 0 else u[0]
        up = u[i + 1] if i < N - 1 else u[N - 1]
        ui = u[i]
        p = (up - um) * inv2h / ui
        pp = (up - 2.0 * ui + um) * invh2 / ui - p * p
        v2 = 1.0 - p * p
        if v2 <= eps_sp:
            return SPACELIKE, i
        q = n + pp / v2 + (n - 1) * coth[i] * p
        # H = q / (u v)
        if q <= eps_h * ui * math.sqrt(v2):
            return MEAN_CONVEXITY, i
        rate = -ui * v2 / q
        if rescaled:
            rate += ui / n
        out[i] = rate
    return OK, -1


@njit(cache=True)
def radial_ssp_rk3(u, dt, h, coth, n, rescaled, eps_h, eps_sp, out):
    N = u.shape[0]
    k = np.empty(N)
    u1 = np.empty(N)
    u2 = np.empty(N)
    status, idx = radial_rate(u, h, coth, n, rescaled, eps_h, eps_sp, k)
    if status != OK:
        return status, idx
    for i in range(N):
        u1[i] = u[i] + dt * k[i]
    status, idx = radial_rate(u1, h, coth, n, rescaled, eps_h, eps_sp, k)
    if status != OK:
        return status, idx
    for i in range(N):
        u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + dt * k[i])
    status, idx = radial_rate(u2, h, coth, n, rescaled, eps_h, eps_sp, k)
    if status != OK:
        return status, idx
    for i in range(N):
        out[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * k[i])
    return OK, -1


@njit(cache=True)
def radial_max_diffusivity(u, h, coth, n):
    """max over nodes of 1/q^2, the largest eigenvalue of dQ/dphi_ij."""
    N = u.shape[0]
    best = 0.0
    for i in range(N):
        um = u[i - 1] if i > 0 else u[0]
        up = u[i + 1] if i < N - 1 else u[N - 1]
        ui = u[i]
        p = (up - um) * (0.5 / h) / ui
        pp = (up - 2.0 * ui + um) / (h * h) / ui - p * p
        v2 = 1.0 - p * p
        q = n + pp / v2 + (n - 1) * coth[i] * p
        d = 1.0 / (q * q)
        if d > best:
            best = d
    return best


@njit(cache=True)
def radial_advance(u, t, t_end, max_steps, gamma, fixed_dt, h, coth, n, rescaled,
                   eps_h, eps_sp):
    """Take up to ``max_steps`` steps in place, stopping exactly at ``t_end``.

    ``fixed_dt <= 0`` selects the CFL step ``gamma h^2 / D_max``.  Returns
    ``(status, node, steps_taken, t, last_dt)``; on a guard trip ``u`` holds
    the last accepted state.
    """
    N = u.shape[0]
    out = np.empty(N)
    steps = 0
    dt = 0.0
    while steps < max_steps and t < t_end:
        if fixed_dt > 0.0:
            dt = fixed_dt
        else:
            dt = gamma * h * h / radial_max_diffusivity(u, h, coth, n)
        last = t + dt >= t_end * (1.0 - 1e-14)
        if last:
            dt = t_end - t
        status, idx = radial_ssp_rk3(u, dt, h, coth, n, rescaled, eps_h, eps_sp, out)
        if status != OK:
            return status, idx, steps, t, dt
        u[:] = out
        t = t_end if last else t + dt
        steps += 1
    return OK, -1, steps, t, dt


# --- disk grids (n = 2, polar mesh in the graph chart) -------------------------

@njit(cache=True)
def _disk_node(u, i, j, dr, D1, D2, r, cs, sn, rows):
    """``|D phi|^2``, ``q`` and the top eigenvalue of the log operator at a node.

    Same stencils and ghost rules as :mod:`discretization`: central
    differences in r, Fourier matrices ``D1``, ``D2`` in theta; the inner ghost
    is the diametrically opposite first-row value, the outer ghost mirrors.
    """
    N, M = u.shape
    half = M // 2
    c = u[i, j]
    f_t = 0.0
    f_tt = 0.0
    f_rt = 0.0
    f_r = 0.0
    f_rr = 0.0
    for k in range(M):
        if i < N - 1:
            up = u[i + 1, k]
        else:
            up = u[i, k]
        if i > 0:
            dn = u[i - 1, k]
        else:
            dn = u[0, (k + half) % M]
        rows[k] = up - dn
        if k == j:
            f_r = (up - dn) / (2.0 * dr)
            f_rr = (up - 2.0 * c + dn) / (dr * dr)
    # difference form, exact on constants (rows of D1, D2 sum to zero)
    for k in range(M):
        f_t += D1[j, k] * (u[i, k] - c)
        f_tt += D2[j, k] * (u[i, k] - c)
        f_rt += D1[j, k] * (rows[k] - rows[j])
    f_rt /= 2.0 * dr
    co, s = cs[j], sn[j]
    ri = r[i]
    gx = co * f_r - s * f_t / ri
    gy = s * f_r + co * f_t / ri
    r2 = ri * ri
    fxx = (co * co * f_rr - 2 * s * co * f_rt / ri + s * s * f_tt / r2
           + s * s * f_r / ri + 2 * s * co * f_t / r2)
    fyy = (s * s * f_rr + 2 * s * co * f_rt / ri + co * co * f_tt / r2
           + co * co * f_r / ri - 2 * s * co * f_t / r2)
    fxy = (s * co * f_rr + (co * co - s * s) * f_rt / ri - s * co * f_tt / r2
           - s * co * f_r / ri - (co * co - s * s) * f_t / r2)
    y1 = ri * co
    y2 = ri * s
    rad = y1 * gx + y2 * gy
    w = 1.0 / (1.0 + r2)
    hxx = fxx + rad * (1.0 - y1 * y1 * w)
    hyy = fyy + rad * (1.0 - y2 * y2 * w)
    hxy = fxy - rad * y1 * y2 * w
    px = gx / c
    py = gy / c
    hxx = hxx / c - px * px
    hyy = hyy / c - py * py
    hxy = hxy / c - px * py
    # sigma^ij = delta + y_i y_j
    qx = px + y1 * (y1 * px + y2 * py)
    qy = py + y2 * (y1 * px + y2 * py)
    grad_sq = px * qx + py * qy
    v2 = 1.0 - grad_sq
    sxx = 1.0 + y1 * y1 + qx * qx / v2
    syy = 1.0 + y2 * y2 + qy * qy / v2
    sxy = y1 * y2 + qx * qy / v2
    q = 2.0 + sxx * hxx + syy * hyy + 2.0 * sxy * hxy
    mean = 0.5 * (sxx + syy)
    lam = mean + math.sqrt(0.25 * (sxx - syy) ** 2 + sxy * sxy)
    return grad_sq, q, lam


@njit(cache=True)
def disk_rate(u, dr, D1, D2, r, cs, sn, rescaled, eps_h, eps_sp, out):
    N, M = u.shape
    rows = np.empty(M)
    for i in range(N):
        for j in range(M):
            grad_sq, q, lam = _disk_node(u, i, j, dr, D1, D2, r, cs, sn, rows)
            v2 = 1.0 - grad_sq
            if v2 <= eps_sp:
                return SPACELIKE, i * M + j
            ui = u[i, j]
            if q <= eps_h * ui * math.sqrt(v2):
                return MEAN_CONVEXITY, i * M + j
            rate = -ui * v2 / q
            if rescaled:
                rate += 0.5 * ui
            out[i, j] = rate
    return OK, -1


@njit(cache=True)
def disk_ssp_rk3(u, dt, dr, D1, D2, r, cs, sn, rescaled, eps_h, eps_sp, out):
    k = np.empty_like(u)
    status, idx = disk_rate(u, dr, D1, D2, r, cs, sn, rescaled, eps_h, eps_sp, k)
    if status != OK:
        return status, idx
    u1 = u + dt * k
    status, idx = disk_rate(u1, dr, D1, D2, r, cs, sn, rescaled, eps_h, eps_sp, k)
    if status != OK:
        return status, idx
    u2 = 0.75 * u + 0.25 * (u1 + dt * k)
    status, idx = disk_rate(u2, dr, D1, D2, r, cs, sn, rescaled, eps_h, eps_sp, k)
    if status != OK:
        return status, idx
    out[:, :] = u / 3.0 + 2.0 / 3.0 * (u2 + dt * k)
    return OK, -1


@njit(cache=True)
def disk_max_diffusivity(u, dr, D1, D2, r, cs, sn):
    N, M = u.shape
    rows = np.empty(M)
    best = 0.0
    for i in range(N):
        for j in range(M):
            grad_sq, q, lam = _disk_node(u, i, j, dr, D1, D2, r, cs, sn, rows)
            d = lam * (1.0 - grad_sq) / (q * q)
            if d > best:
                best = d
    return best


@njit(cache=True)
def disk_advance(u, t, t_end, max_steps, gamma, fixed_dt, h_min, dr, D1, D2, r, cs, sn,
                 rescaled, eps_h, eps_sp):
    """Disk counterpart of :func:`radial_advance`."""
    out = np.empty_like(u)
    steps = 0
    dt = 0.0
    while steps < max_steps and t < t_end:
        if fixed_dt > 0.0:
            dt = fixed_dt
        else:
            dt = gamma * h_min * h_min / disk_max_diffusivity(u, dr, D1, D2, r, cs, sn)
        last = t + dt >= t_end * (1.0 - 1e-14)
        if last:
            dt = t_end - t
        status, idx = disk_ssp_rk3(u, dt, dr, D1, D2, r, cs, sn, rescaled, eps_h, eps_sp, out)
        if status != OK:
            return status, idx, steps, t, dt
        u[:, :] = out
        t = t_end if last else t + dt
        steps += 1
    return OK, -1, steps, t, dt
