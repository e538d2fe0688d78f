"""Pairwise interaction sums over particle systems.

The O(N^2) sums behind both particle methods live here: velocities (and,
for the blob method, velocity divergences) induced by all particles on all
particles, plus evaluation of the blob velocity field at off-grid points.

A regularized kernel is compiled into a flat "pack" of arrays and scalars
covering its three backends at once:

* passthrough power laws enter as (exponent, coefficient) rows,
* an analytic Newtonian part enters through its per-component closed-form
  coefficients,
* the merged radial table enters as the even phi = f/r and g profiles with
  a far-field description of the raw tabulated terms.

The same pack drives the numba kernels (one scalar pair at a time) and the
numpy fallback (chunked broadcasting), selected per call or by the
AGGBLOB_NUMBA environment flag.
"""

import functools
import math

import numpy as np

from . import _pairwise_numpy as _numpy_impl
from .backend import (
    STATUS_COINCIDENT,
    STATUS_OUT_OF_RANGE,
    configure_threads,
    default_backend,
)
from .errors import (
    CoincidentParticlesError,
    DimensionMismatchError,
    IndexMismatchError,
    OutOfTableRangeError,
    ValidationError,
)
from .kernels import TWO_PI, MorseTerm, NewtonianTerm, PowerLawTerm

_threads_configured = False


def _numba_impl():
    global _threads_configured
    from . import _pairwise_numba as impl

    if not _threads_configured:
        configure_threads()
        _threads_configured = True
    return impl


def _resolve_backend(backend):
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValidationError(f"unknown pairwise backend {backend!r}")
    return backend


def _coords(points, dim, what):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise DimensionMismatchError(
            f"{what} must have shape (n, {dim}), got {pts.shape}"
        )
    n = pts.shape[0]
    px = np.array(pts[:, 0], dtype=float)
    py = np.array(pts[:, 1], dtype=float) if dim == 2 else np.zeros(n)
    return px, py, n


def _weights(weights, n):
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise IndexMismatchError(
            f"weights of shape {w.shape} for {n} particles"
        )
    return np.ascontiguousarray(w)


def _raw_term_pack(terms, dim):
    """Raw-kernel phi/g coefficients, one row per term.

    code 0: power law   phi = A r^B,  g = C r^B
    code 1: 1D Newtonian phi = A / r
    code 2: 2D Newtonian phi = A / r^2
    code 3: Morse        phi = A e^{-Br}/r,  g = e^{-Br}(C + D/r)
    Newtonian rows carry no g: the classical Laplacian vanishes off the
    origin and the mollified point mass is negligible past the table edge.
    """
    codes, A, B, C, D = [], [], [], [], []
    for t in terms:
        if isinstance(t, PowerLawTerm):
            codes.append(0)
            A.append(t.coeff)
            B.append(t.a - 2.0)
            C.append(t.coeff * (t.a + dim - 2.0))
            D.append(0.0)
        elif isinstance(t, NewtonianTerm):
            codes.append(1 if dim == 1 else 2)
            A.append(t.coeff * 0.5 if dim == 1 else t.coeff / TWO_PI)
            B.append(0.0)
            C.append(0.0)
            D.append(0.0)
        elif isinstance(t, MorseTerm):
            codes.append(3)
            A.append(-t.coeff * t.amplitude / t.length)
            B.append(1.0 / t.length)
            C.append(t.coeff * t.amplitude / t.length**2)
            D.append(-t.coeff * t.amplitude * (dim - 1.0) / t.length)
        else:  # pragma: no cover - the kernel type union is closed
            raise ValidationError(f"unknown kernel term {t!r}")
    return (
        np.array(codes, dtype=np.int64),
        np.array(A, dtype=float),
        np.array(B, dtype=float),
        np.array(C, dtype=float),
        np.array(D, dtype=float),
    )


def blob_pack(reg):
    """Flatten a RegularizedKernel into the arrays the hot loops consume."""
    try:
        return reg._pairwise_pack
    except AttributeError:
        pass
    d = reg.dim
    pt_e = np.array([t.a - 2.0 for t in reg.passthrough], dtype=float)
    pt_c = np.array([t.coeff for t in reg.passthrough], dtype=float)
    pt_gc = np.array(
        [t.coeff * (t.a + d - 2.0) for t in reg.passthrough], dtype=float
    )
    na = reg.newtonian
    if na is not None:
        newt_kind = d
        sig = na.sigmas
        nsig2inv = 1.0 / (sig * sig)
        nisig = 1.0 / sig
        if d == 1:
            nc = na.coeff * na.amps * na.widths * (math.sqrt(math.pi) / 2.0)
            nphi0 = float(na.coeff * np.sum(na.amps * na.widths / sig))
        else:
            nc = na.coeff * na.amps * na.widths**2 / 2.0
            nphi0 = float(
                na.coeff * np.sum(na.amps * na.widths**2 / (2.0 * sig * sig))
            )
        ng = na.coeff * na.amps / na.delta**d
    else:
        newt_kind = 0
        nc = nsig2inv = nisig = ng = np.empty(0)
        nphi0 = 0.0
    if reg.table_phi is not None:
        has_table = True
        phi_tab = np.ascontiguousarray(reg.table_phi)
        g_tab = np.ascontiguousarray(reg.table_g)
        dr = float(reg.dr)
        rmax = float(reg.table_config.r_max)
        far = _raw_term_pack(reg.tabulated_terms, d)
    else:
        has_table = False
        phi_tab = g_tab = np.empty(0)
        dr = 1.0
        rmax = 0.0
        far = _raw_term_pack((), d)
    pack = (
        pt_e, pt_c, pt_gc, newt_kind, nc, nsig2inv, nisig, nphi0, ng,
        has_table, phi_tab, g_tab, dr, rmax, bool(reg.far_field_fallback),
        *far,
    )
    reg._pairwise_pack = pack
    return pack


@functools.lru_cache(maxsize=64)
def _particle_pack(kernel):
    codes, A, B, C, D = _raw_term_pack(kernel.terms, kernel.dim)
    singular = any(not t.grad_defined_at_origin() for t in kernel.terms)
    return codes, A, B, C, D, singular


def _raise_status(status, reg=None):
    if status & STATUS_OUT_OF_RANGE:
        r_max = reg.table_config.r_max if reg is not None else None
        raise OutOfTableRangeError(
            f"pair distance beyond table radius {r_max} "
            "with far-field fallback disabled"
        )
    if status & STATUS_COINCIDENT:
        raise CoincidentParticlesError(
            "coincident particles under a kernel with singular gradient"
        )


def _vec(vx, vy, dim):
    if dim == 1:
        return vx[:, None]
    return np.stack((vx, vy), axis=1)


def blob_velocity_div(positions, weights, reg, backend=None):
    """Blob velocities and velocity divergences at the particles.

    v_i = -sum_j phi(|X_i - X_j|) (X_i - X_j) m_j over all j including the
    diagonal (K_delta is smooth, so the self term is finite and the i = j
    force vanishes), and div v_i = -sum_j lap K_delta(|X_i - X_j|) m_j.
    Returns (velocities (n, d), divergences (n,)).
    """
    px, py, n = _coords(positions, reg.dim, "positions")
    w = _weights(weights, n)
    pack = blob_pack(reg)
    backend = _resolve_backend(backend)
    if backend == "numba":
        impl = _numba_impl()
        vx = np.empty(n)
        vy = np.empty(n)
        div = np.empty(n)
        status = np.zeros(1, dtype=np.int64)
        impl.blob_velocity_div(px, py, w, *pack, vx, vy, div, status)
        st = int(status[0])
    else:
        vx, vy, div, st = _numpy_impl.blob_velocity_div(px, py, w, pack)
    _raise_status(st, reg)
    return _vec(vx, vy, reg.dim), div


def blob_velocity_at(targets, positions, weights, reg, backend=None):
    """Blob velocity field evaluated at arbitrary target points."""
    px, py, n = _coords(positions, reg.dim, "positions")
    tx, ty, m = _coords(targets, reg.dim, "targets")
    w = _weights(weights, n)
    pack = blob_pack(reg)
    backend = _resolve_backend(backend)
    if backend == "numba":
        impl = _numba_impl()
        vx = np.empty(m)
        vy = np.empty(m)
        status = np.zeros(1, dtype=np.int64)
        impl.blob_velocity_at(tx, ty, px, py, w, *pack, vx, vy, status)
        st = int(status[0])
    else:
        vx, vy, st = _numpy_impl.blob_velocity_at(tx, ty, px, py, w, pack)
    _raise_status(st, reg)
    return _vec(vx, vy, reg.dim)


def particle_velocity(positions, weights, kernel, backend=None):
    """Raw-kernel particle velocities; the diagonal is skipped.

    Coincident distinct particles contribute nothing when grad K extends
    continuously by zero at the origin and raise CoincidentParticlesError
    when it does not.
    """
    px, py, n = _coords(positions, kernel.dim, "positions")
    w = _weights(weights, n)
    codes, A, B, C, D, singular = _particle_pack(kernel)
    backend = _resolve_backend(backend)
    if backend == "numba":
        impl = _numba_impl()
        vx = np.empty(n)
        vy = np.empty(n)
        status = np.zeros(1, dtype=np.int64)
        impl.particle_velocity(px, py, w, codes, A, B, C, D, singular,
                               vx, vy, status)
        st = int(status[0])
    else:
        vx, vy, st = _numpy_impl.particle_velocity(
            px, py, w, codes, A, B, C, D, singular)
    _raise_status(st)
    return _vec(vx, vy, kernel.dim)
