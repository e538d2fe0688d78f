"""Vectorized pairwise fallback.

Mirrors _pairwise_numba semantics exactly (same pack layout, same status
bits) but evaluates in chunks of target rows with numpy broadcasting.  Sums
over sources use matrix products, so the floating-point reduction order can
differ from the jitted path at the few-ulp level.
"""

import numpy as np
from scipy.special import erf

from .backend import STATUS_COINCIDENT, STATUS_OUT_OF_RANGE

_CHUNK = 512


def _interp_even(tab, dr, r):
    n = tab.shape[0]
    t = r / dr
    j = np.clip(np.floor(t).astype(np.int64) - 1, -1, n - 4)
    u = t - j
    w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0
    w1 = u * (u - 2.0) * (u - 3.0) / 2.0
    w2 = -u * (u - 1.0) * (u - 3.0) / 2.0
    w3 = u * (u - 1.0) * (u - 2.0) / 6.0
    v0 = np.where(j < 0, tab[1], tab[np.maximum(j, 0)])
    return w0 * v0 + w1 * tab[j + 1] + w2 * tab[j + 2] + w3 * tab[j + 3]


def _raw_pair(r2, r, codes, pA, pB, pC, pD):
    phi = np.zeros_like(r2)
    g = np.zeros_like(r2)
    for t in range(codes.shape[0]):
        c = codes[t]
        if c == 0:
            rp = r2 ** (pB[t] * 0.5)
            phi += pA[t] * rp
            g += pC[t] * rp
        elif c == 1:
            phi += pA[t] / r
        elif c == 2:
            phi += pA[t] / r2
        else:
            e = np.exp(-r * pB[t])
            phi += pA[t] * e / r
            g += e * (pC[t] + pD[t] / r)
    return phi, g


def _blob_pair(r2, pack):
    """phi, g, status for K_delta over an array of squared distances."""
    (pt_e, pt_c, pt_gc, newt_kind, nc, nsig2inv, nisig, nphi0, ng,
     has_table, phi_tab, g_tab, dr, rmax, fallback,
     far_codes, farA, farB, farC, farD) = pack
    phi = np.zeros_like(r2)
    g = np.zeros_like(r2)
    status = 0
    for t in range(pt_e.shape[0]):
        rp = r2 ** (pt_e[t] * 0.5)
        phi += pt_c[t] * rp
        g += pt_gc[t] * rp
    if newt_kind == 1:
        r = np.sqrt(r2)
        safe = np.where(r > 0.0, r, 1.0)
        s = np.zeros_like(r2)
        for k in range(nc.shape[0]):
            s += nc[k] * erf(r * nisig[k])
        phi += np.where(r > 0.0, s / safe, nphi0)
        for k in range(ng.shape[0]):
            g += ng[k] * np.exp(-r2 * nsig2inv[k])
    elif newt_kind == 2:
        safe = np.where(r2 > 0.0, r2, 1.0)
        s = np.zeros_like(r2)
        for k in range(nc.shape[0]):
            s += nc[k] * (-np.expm1(-r2 * nsig2inv[k]))
        phi += np.where(r2 > 0.0, s / safe, nphi0)
        for k in range(ng.shape[0]):
            g += ng[k] * np.exp(-r2 * nsig2inv[k])
    if has_table:
        r = np.sqrt(r2)
        near = r <= rmax
        phi_t = _interp_even(phi_tab, dr, np.where(near, r, 0.0))
        g_t = _interp_even(g_tab, dr, np.where(near, r, 0.0))
        phi += np.where(near, phi_t, 0.0)
        g += np.where(near, g_t, 0.0)
        if not np.all(near):
            if not fallback:
                status = STATUS_OUT_OF_RANGE
            else:
                # near entries are discarded below; keep them off the
                # singular raw profiles so no spurious warnings fire
                r2_far = np.where(near, 1.0, r2)
                r_far = np.where(near, 1.0, r)
                fphi, fg = _raw_pair(r2_far, r_far,
                                     far_codes, farA, farB, farC, farD)
                phi += np.where(near, 0.0, fphi)
                g += np.where(near, 0.0, fg)
    return phi, g, status


def blob_velocity_div(px, py, w, pack):
    n = px.shape[0]
    vx = np.empty(n)
    vy = np.empty(n)
    div = np.empty(n)
    status = 0
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        dx = px[lo:hi, None] - px[None, :]
        dy = py[lo:hi, None] - py[None, :]
        r2 = dx * dx + dy * dy
        phi, g, bit = _blob_pair(r2, pack)
        status |= bit
        vx[lo:hi] = -(phi * dx) @ w
        vy[lo:hi] = -(phi * dy) @ w
        div[lo:hi] = -g @ w
    return vx, vy, div, status


def blob_velocity_at(tx, ty, px, py, w, pack):
    m_t = tx.shape[0]
    vx = np.empty(m_t)
    vy = np.empty(m_t)
    status = 0
    for lo in range(0, m_t, _CHUNK):
        hi = min(lo + _CHUNK, m_t)
        dx = tx[lo:hi, None] - px[None, :]
        dy = ty[lo:hi, None] - py[None, :]
        r2 = dx * dx + dy * dy
        phi, _, bit = _blob_pair(r2, pack)
        status |= bit
        vx[lo:hi] = -(phi * dx) @ w
        vy[lo:hi] = -(phi * dy) @ w
    return vx, vy, status


def particle_velocity(px, py, w, codes, pA, pB, pC, pD, singular):
    n = px.shape[0]
    vx = np.empty(n)
    vy = np.empty(n)
    status = 0
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        dx = px[lo:hi, None] - px[None, :]
        dy = py[lo:hi, None] - py[None, :]
        r2 = dx * dx + dy * dy
        off_diag = np.ones_like(r2, dtype=bool)
        off_diag[np.arange(hi - lo), np.arange(lo, hi)] = False
        if singular and bool(np.any((r2 == 0.0) & off_diag)):
            status |= STATUS_COINCIDENT
        live = off_diag & (r2 > 0.0)
        r2s = np.where(live, r2, 1.0)
        phi, _ = _raw_pair(r2s, np.sqrt(r2s), codes, pA, pB, pC, pD)
        phi = np.where(live, phi, 0.0)
        vx[lo:hi] = -(phi * dx) @ w
        vy[lo:hi] = -(phi * dy) @ w
    return vx, vy, status
