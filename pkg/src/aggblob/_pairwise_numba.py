"""Jitted pairwise kernels.

Positions are always passed as two coordinate vectors (the y column is zero
in 1D), so one compiled kernel serves both dimensions; every d-dependent
constant is baked into the pack by pairwise.py.  The outer loop parallelizes
over targets while each inner sum runs in ascending source order, keeping
results reproducible for a fixed thread count.

Pack layout (positional, shared with the numpy twin):
  pt_e, pt_c, pt_gc        passthrough powers: phi += c r^e, g += gc r^e
  newt_kind                0 none, 1/2 analytic Newtonian in that dimension
  nc, nsig2inv, nisig      per-component closed-form coefficients
  nphi0, ng                phi(0) limit and g Gaussian amplitudes
  has_table, phi_tab, g_tab, dr, rmax, fallback
  far_codes, farA..farD    raw-kernel far field per tabulated term
"""

import math

from numba import njit, prange

from .backend import STATUS_COINCIDENT, STATUS_OUT_OF_RANGE


@njit(cache=True, inline="always")
def _interp_even(tab, dr, r):
    """Cubic Lagrange on a uniform grid, even mirror across r = 0."""
    n = tab.shape[0]
    t = r / dr
    j = int(t) - 1
    if j < -1:
        j = -1
    elif j > n - 4:
        j = n - 4
    u = t - j
    w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
    w1 = u * (u - 2.0) * (u - 3.0) / 2.0
    w2 = -u * (u - 1.0) * (u - 3.0) / 2.0
    w3 = u * (u - 1.0) * (u - 2.0) / 6.0
    v0 = tab[1] if j < 0 else tab[j]
    return w0 * v0 + w1 * tab[j + 1] + w2 * tab[j + 2] + w3 * tab[j + 3]


@njit(cache=True, inline="always")
def _raw_pair(r2, r, codes, pA, pB, pC, pD):
    """phi and g of the raw kernel terms (also the far-field fallback)."""
    phi = 0.0
    g = 0.0
    for t in range(codes.shape[0]):
        c = codes[t]
        if c == 0:  # power law: pA r^(a-2) for phi, pC r^(a-2) for g
            rp = r2 ** (pB[t] * 0.5)
            phi += pA[t] * rp
            g += pC[t] * rp
        elif c == 1:  # 1D Newtonian
            phi += pA[t] / r
        elif c == 2:  # 2D Newtonian
            phi += pA[t] / r2
        else:  # Morse: phi = pA e^{-r/l}/r, g = e^{-r/l}(pC + pD/r)
            e = math.exp(-r * pB[t])
            phi += pA[t] * e / r
            g += e * (pC[t] + pD[t] / r)
    return phi, g


@njit(cache=True, inline="always")
def _blob_pair(r2, pt_e, pt_c, pt_gc, newt_kind, nc, nsig2inv, nisig,
               nphi0, ng, has_table, phi_tab, g_tab, dr, rmax, fallback,
               far_codes, farA, farB, farC, farD):
    """phi and g of K_delta at squared distance r2; returns a status bit."""
    phi = 0.0
    g = 0.0
    status = 0
    for t in range(pt_e.shape[0]):
        rp = r2 ** (pt_e[t] * 0.5)
        phi += pt_c[t] * rp
        g += pt_gc[t] * rp
    if newt_kind == 1:
        r = math.sqrt(r2)
        if r > 0.0:
            s = 0.0
            for k in range(nc.shape[0]):
                s += nc[k] * math.erf(r * nisig[k])
            phi += s / r
        else:
            phi += nphi0
        for k in range(ng.shape[0]):
            g += ng[k] * math.exp(-r2 * nsig2inv[k])
    elif newt_kind == 2:
        if r2 > 0.0:
            s = 0.0
            for k in range(nc.shape[0]):
                s += nc[k] * (-math.expm1(-r2 * nsig2inv[k]))
            phi += s / r2
        else:
            phi += nphi0
        for k in range(ng.shape[0]):
            g += ng[k] * math.exp(-r2 * nsig2inv[k])
    if has_table:
        r = math.sqrt(r2)
        if r <= rmax:
            phi += _interp_even(phi_tab, dr, r)
            g += _interp_even(g_tab, dr, r)
        elif not fallback:
            status = STATUS_OUT_OF_RANGE
        else:
            fphi, fg = _raw_pair(r2, r, far_codes, farA, farB, farC, farD)
            phi += fphi
            g += fg
    return phi, g, status


@njit(cache=True, parallel=True)
def blob_velocity_div(px, py, w,
                      pt_e, pt_c, pt_gc, newt_kind, nc, nsig2inv, nisig,
                      nphi0, ng, has_table, phi_tab, g_tab, dr, rmax,
                      fallback, far_codes, farA, farB, farC, farD,
                      vx, vy, div, status):
    n = px.shape[0]
    for i in prange(n):
        sx = 0.0
        sy = 0.0
        sd = 0.0
        st = 0
        for j in range(n):
            dx = px[i] - px[j]
            dy = py[i] - py[j]
            r2 = dx * dx + dy * dy
            phi, g, bit = _blob_pair(
                r2, pt_e, pt_c, pt_gc, newt_kind, nc, nsig2inv, nisig,
                nphi0, ng, has_table, phi_tab, g_tab, dr, rmax, fallback,
                far_codes, farA, farB, farC, farD)
            st |= bit
            m = w[j]
            sx -= phi * dx * m
            sy -= phi * dy * m
            sd -= g * m
        vx[i] = sx
        vy[i] = sy
        div[i] = sd
        if st != 0:
            status[0] = st


@njit(cache=True, parallel=True)
def blob_velocity_at(tx, ty, px, py, w,
                     pt_e, pt_c, pt_gc, newt_kind, nc, nsig2inv, nisig,
                     nphi0, ng, has_table, phi_tab, g_tab, dr, rmax,
                     fallback, far_codes, farA, farB, farC, farD,
                     vx, vy, status):
    """Velocity field at off-grid targets induced by the blob particles."""
    m_t = tx.shape[0]
    n = px.shape[0]
    for i in prange(m_t):
        sx = 0.0
        sy = 0.0
        st = 0
        for j in range(n):
            dx = tx[i] - px[j]
            dy = ty[i] - py[j]
            r2 = dx * dx + dy * dy
            phi, _, bit = _blob_pair(
                r2, pt_e, pt_c, pt_gc, newt_kind, nc, nsig2inv, nisig,
                nphi0, ng, has_table, phi_tab, g_tab, dr, rmax, fallback,
                far_codes, farA, farB, farC, farD)
            st |= bit
            m = w[j]
            sx -= phi * dx * m
            sy -= phi * dy * m
        vx[i] = sx
        vy[i] = sy
        if st != 0:
            status[0] = st


@njit(cache=True, parallel=True)
def particle_velocity(px, py, w, codes, pA, pB, pC, pD, singular,
                      vx, vy, status):
    """Raw-kernel velocities: diagonal skipped, coincident pairs flagged."""
    n = px.shape[0]
    for i in prange(n):
        sx = 0.0
        sy = 0.0
        st = 0
        for j in range(n):
            if j == i:
                continue
            dx = px[i] - px[j]
            dy = py[i] - py[j]
            r2 = dx * dx + dy * dy
            if r2 == 0.0:
                if singular:
                    st = STATUS_COINCIDENT
                continue
            r = math.sqrt(r2)
            phi, _ = _raw_pair(r2, r, codes, pA, pB, pC, pD)
            m = w[j]
            sx -= phi * dx * m
            sy -= phi * dy * m
        vx[i] = sx
        vy[i] = sy
        if st != 0:
            status[0] = st
