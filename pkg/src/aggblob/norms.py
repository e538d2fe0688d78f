"""Discrete norms and diagnostics for lattice-supported grid functions.

A GridFunction is a finitely supported function on the lattice h*Z^d.
The L^p and W^{1,p} norms follow the forward-difference convention;
the dual norm W^{-1,2} is computed exactly as a weighted quadratic
form through one sparse symmetric linear solve on a truncated box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from .errors import (
    DimensionMismatchError,
    IndexMismatchError,
    SolverConvergenceError,
    ValidationError,
)
from .solver import ParticleState


def _frozen(a, dtype):
    arr = np.asarray(a, dtype=dtype)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridFunction:
    """Finitely supported u: h*Z^d -> R stored as (multi-index, value) rows."""

    h: float
    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        if not self.h > 0:
            raise ValidationError(f"grid spacing must be positive, got {self.h}")
        if self.dim not in (1, 2):
            raise DimensionMismatchError(f"dim must be 1 or 2, got {self.dim}")
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim == 1:
            idx = idx[:, None]
        if idx.ndim != 2 or idx.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"indices of shape {np.shape(self.indices)} for dim {self.dim}"
            )
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (idx.shape[0],):
            raise IndexMismatchError(
                f"{vals.shape[0] if vals.ndim == 1 else vals.shape} values for "
                f"{idx.shape[0]} indices"
            )
        if idx.shape[0] and np.unique(idx, axis=0).shape[0] != idx.shape[0]:
            raise ValidationError("duplicate multi-indices in grid function")
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "indices", _frozen(idx, np.int64))
        object.__setattr__(self, "values", _frozen(vals, float))

    @classmethod
    def from_entries(cls, h, entries, dim):
        """Build from a {multi-index: value} mapping (1D keys may be ints)."""
        rows = sorted(
            ((int(k),) if np.isscalar(k) else tuple(int(c) for c in k), float(v))
            for k, v in entries.items()
        )
        idx = np.array([k for k, _ in rows], dtype=np.int64).reshape(-1, dim)
        return cls(h, idx, np.array([v for _, v in rows], dtype=float), dim)

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    def positions(self) -> np.ndarray:
        return self.indices * self.h


def _ball_mask(u: GridFunction, ball):
    if ball is None:
        return np.ones(u.n, dtype=bool)
    if not ball > 0:
        raise ValidationError(f"ball radius must be positive, got {ball}")
    pos = u.positions()
    return np.sum(pos * pos, axis=1) <= float(ball) ** 2 * (1 + 1e-12)


def _check_p(p) -> float:
    p = float(p)
    if not p >= 1.0:
        raise ValidationError(f"norm exponent must satisfy p >= 1, got {p}")
    return p


def lp_norm(u: GridFunction, p, ball=None) -> float:
    """(sum_i |u_i|^p h^d)^{1/p} over the support, or sup for p = inf.

    With ball=R the sum runs only over sites within Euclidean distance R
    of the origin.
    """
    p = _check_p(p)
    vals = np.abs(u.values[_ball_mask(u, ball)])
    if vals.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(vals))
    return float(np.sum(vals**p) * u.h**u.dim) ** (1.0 / p)


def _forward_diffs(u: GridFunction, j: int) -> np.ndarray:
    # (D_j^+ u)_i = (u_{i+e_j} - u_i)/h over supp(u) and its shift by -e_j
    lookup = {tuple(ix): v for ix, v in zip(u.indices, u.values)}
    sites = set(lookup)
    for ix in u.indices:
        s = list(ix)
        s[j] -= 1
        sites.add(tuple(s))
    out = np.empty(len(sites))
    for k, s in enumerate(sites):
        up = list(s)
        up[j] += 1
        out[k] = (lookup.get(tuple(up), 0.0) - lookup.get(s, 0.0)) / u.h
    return out


def w1p_norm(u: GridFunction, p) -> float:
    """(||u||_p^p + sum_j ||D_j^+ u||_p^p)^{1/p}; max of sups for p = inf."""
    p = _check_p(p)
    if u.n == 0:
        return 0.0
    hd = u.h**u.dim
    if math.isinf(p):
        best = float(np.max(np.abs(u.values)))
        for j in range(u.dim):
            d = _forward_diffs(u, j)
            if d.size:
                best = max(best, float(np.max(np.abs(d))))
        return best
    total = float(np.sum(np.abs(u.values) ** p)) * hd
    for j in range(u.dim):
        d = _forward_diffs(u, j)
        total += float(np.sum(np.abs(d) ** p)) * hd
    return total ** (1.0 / p)


def dual_norm_2(u: GridFunction, box_margin: int = 4) -> float:
    """Negative-order Sobolev norm W^{-1,2} of u.

    Equals sqrt(h^d u^T A^{-1} u) where A = I + sum_j (D_j^+)^T (D_j^+)
    assembled on the support's bounding box enlarged by box_margin cells
    with zero exterior values. This realizes the duality sup over test
    functions supported in the enlarged box; the value is monotone in
    the margin and stabilizes quickly because the discrete Green's
    function decays exponentially.
    """
    box_margin = int(box_margin)
    if box_margin < 0:
        raise ValidationError(f"box_margin must be nonnegative, got {box_margin}")
    if u.n == 0 or not np.any(u.values):
        return 0.0
    lo = u.indices.min(axis=0) - box_margin
    hi = u.indices.max(axis=0) + box_margin
    sizes = tuple(int(s) for s in hi - lo + 1)
    ntot = int(np.prod(sizes))

    def second_diff(n):
        main = np.full(n, 2.0)
        off = np.full(n - 1, -1.0)
        return sparse.diags([off, main, off], [-1, 0, 1])

    if u.dim == 1:
        lap = second_diff(sizes[0])
    else:
        lap = sparse.kron(second_diff(sizes[0]), sparse.identity(sizes[1])) + (
            sparse.kron(sparse.identity(sizes[0]), second_diff(sizes[1]))
        )
    a = (sparse.identity(ntot) + lap / u.h**2).tocsr()

    b = np.zeros(ntot)
    flat = np.ravel_multi_index(tuple((u.indices - lo).T), sizes)
    b[flat] = u.values
    x, info = cg(a, b, rtol=1e-12, atol=0.0, maxiter=20 * ntot)
    if info != 0:
        raise SolverConvergenceError(
            f"conjugate gradient failed to reach 1e-12 residual (info={info})"
        )
    # quadratic form is positive; clip roundoff in the last digit
    return math.sqrt(max(float(b @ x), 0.0) * u.h**u.dim)


def energy_delta(state: ParticleState, rk) -> float:
    """Interaction energy (1/2) sum_{ij} K_delta(X_i - X_j) m_i m_j.

    The diagonal is included; K_delta(0) is finite for every regularized
    term, and exactly K(0) for passthrough terms. Nonincreasing along
    solver trajectories.
    """
    if state.dim != rk.dim:
        raise DimensionMismatchError(
            f"state dim {state.dim} vs kernel dim {rk.dim}"
        )
    pos = state.positions
    diff = pos[:, None, :] - pos[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=-1))
    kmat = rk.potential_profile(r.ravel()).reshape(r.shape)
    w = state.weights
    return 0.5 * float(w @ kmat @ w)


def resolve_norm(name: str):
    """Map a norm name used on the command line to (kind, p)."""
    table = {
        "l1": ("lp", 1.0),
        "l2": ("lp", 2.0),
        "linf": ("lp", math.inf),
        "dual2": ("dual2", 2.0),
    }
    if name not in table:
        raise ValidationError(
            f"unknown norm {name!r}; choose from {sorted(table)}"
        )
    return table[name]


def _restrict(g: GridFunction, ball) -> GridFunction:
    if ball is None:
        return g
    m = _ball_mask(g, ball)
    return GridFunction(g.h, g.indices[m], g.values[m], g.dim)


def _error_norm(g: GridFunction, p, norm, ball, box_margin) -> float:
    if norm == "lp":
        return lp_norm(g, p, ball)
    if norm == "dual2":
        return dual_norm_2(_restrict(g, ball), box_margin)
    raise ValidationError(f"unknown norm kind {norm!r}; use 'lp' or 'dual2'")


def _aligned(exact, approx: ParticleState, field: str, width) -> np.ndarray:
    if isinstance(exact, ParticleState):
        if exact.dim != approx.dim:
            raise DimensionMismatchError(
                f"exact dim {exact.dim} vs approx dim {approx.dim}"
            )
        if exact.h != approx.h or not np.array_equal(exact.indices, approx.indices):
            raise IndexMismatchError(
                "exact and approximate states are not on the same origin grid"
            )
        return getattr(exact, field)
    arr = np.asarray(exact, dtype=float)
    want = (approx.n,) if width is None else (approx.n, width)
    if arr.shape != want:
        raise IndexMismatchError(
            f"exact values of shape {arr.shape}, expected {want}"
        )
    return arr


def trajectory_error(exact, approx: ParticleState, p=1.0, norm="lp",
                     ball=None, box_margin: int = 4) -> float:
    """Norm of the per-site Euclidean trajectory deviation |X_i - X~_i|.

    exact is either a ParticleState on the same origin grid or an array
    of exact positions aligned with approx. The deviation magnitudes
    form a grid function indexed by the origin grid, measured with
    lp_norm (kind "lp", exponent p, optional ball) or dual_norm_2
    (kind "dual2").
    """
    pos = _aligned(exact, approx, "positions", approx.dim)
    d = pos - approx.positions
    e = np.sqrt(np.sum(d * d, axis=1))
    g = GridFunction(approx.h, approx.indices, e, approx.dim)
    return _error_norm(g, p, norm, ball, box_margin)


def density_error(exact, approx: ParticleState, p=1.0, norm="lp",
                  ball=None, box_margin: int = 4) -> float:
    """Norm of the per-site density deviation rho_i - rho~_i."""
    rho = _aligned(exact, approx, "densities", None)
    g = GridFunction(approx.h, approx.indices, rho - approx.densities, approx.dim)
    return _error_norm(g, p, norm, ball, box_margin)
