"""Independent exact solutions used as ground truth in convergence studies.

Three references: the radial mass-coordinate solution of the Newtonian
flow, the uniform contraction driven by a pure quadratic kernel, and
the equilibrium ring radius of repulsive-attractive power-law kernels.
Each is computed without touching the particle solver, so agreement is
evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptySupportError,
    NoRootError,
    PastBlowupError,
    ValidationError,
)
from .initial_data import IndicatorBall, IndicatorBox, PolyBump, Scaled, SmoothBump
from .kernels import Kernel, PowerLawTerm
from .solver import ParticleState

_CELLS = 4096
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


def _is_radial(profile, dim: int) -> bool:
    if isinstance(profile, Scaled):
        return _is_radial(profile.inner, dim)
    if isinstance(profile, (PolyBump, IndicatorBall, SmoothBump)):
        return True
    if isinstance(profile, IndicatorBox):
        return dim == 1 and len(profile.halfwidths) == 1
    return bool(getattr(profile, "radial", False))


def _radial_points(r: np.ndarray, dim: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if dim == 1:
        return r[..., None]
    return np.stack([r, np.zeros_like(r)], axis=-1)


@dataclass(frozen=True)
class RadialExactSolution:
    """Mass-coordinate solution of the radial Newtonian aggregation flow.

    Characteristics satisfy r(t)^d = r(0)^d - d t m(r(0)) where m(r) is
    the per-angle ball mass; the density along each characteristic is
    (1/rho0 - t)^(-1). Valid strictly before the blowup time
    t* = 1/max rho0.
    """

    profile: object
    dim: int
    blowup_time: float
    _edges: np.ndarray
    _cum: np.ndarray

    def _rho_r(self, r) -> np.ndarray:
        return np.asarray(
            self.profile.eval_rho0(_radial_points(np.asarray(r, float), self.dim)),
            dtype=float,
        )

    def _check_t(self, t: float) -> float:
        t = float(t)
        if t >= self.blowup_time - 1e-9:
            raise PastBlowupError(
                f"t = {t} is not strictly before the blowup time "
                f"{self.blowup_time}"
            )
        return t

    def mass(self, r) -> np.ndarray:
        """m(r) = integral of rho0(s) s^(d-1) over [0, r]."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r < 0):
            raise ValidationError("mass coordinate takes nonnegative radii")
        rmax = self._edges[-1]
        cell = self._edges[1] - self._edges[0]
        rc = np.minimum(r, rmax)
        k = np.minimum((rc / cell).astype(int), _CELLS - 1)
        lo = self._edges[k]
        # 5-point Gauss-Legendre on the partial cell [lo, rc]
        half = 0.5 * (rc - lo)
        mid = 0.5 * (rc + lo)
        nodes = mid[:, None] + half[:, None] * _GL_X
        vals = self._rho_r(nodes) * nodes ** (self.dim - 1)
        return self._cum[k] + half * (vals @ _GL_W)

    def radius(self, r0, t) -> np.ndarray:
        """Characteristic position r(t) for initial radius r0."""
        t = self._check_t(t)
        r0 = np.atleast_1d(np.asarray(r0, dtype=float))
        rd = r0**self.dim - self.dim * t * self.mass(r0)
        return np.maximum(rd, 0.0) ** (1.0 / self.dim)

    def density(self, r0, t) -> np.ndarray:
        """Density at time t along the characteristic starting at r0."""
        t = self._check_t(t)
        rho0 = self._rho_r(np.atleast_1d(np.asarray(r0, dtype=float)))
        pos = rho0 > 0.0
        safe = np.where(pos, rho0, 1.0)
        return np.where(pos, 1.0 / (1.0 / safe - t), 0.0)

    def trajectories(self, positions0, t) -> np.ndarray:
        """Exact positions at time t for particles starting at positions0."""
        x0 = np.atleast_2d(np.asarray(positions0, dtype=float))
        if x0.shape[1] != self.dim:
            raise ValidationError(
                f"positions of shape {x0.shape} in a dim-{self.dim} solution"
            )
        r0 = np.sqrt(np.sum(x0 * x0, axis=1))
        rt = self.radius(r0, t)
        scale = np.where(r0 > 0.0, rt / np.where(r0 > 0.0, r0, 1.0), 0.0)
        return x0 * scale[:, None]

    def densities(self, positions0, t) -> np.ndarray:
        x0 = np.atleast_2d(np.asarray(positions0, dtype=float))
        return self.density(np.sqrt(np.sum(x0 * x0, axis=1)), t)

    def velocities(self, positions0, t) -> np.ndarray:
        """Exact velocity at time t along trajectories labeled by positions0.

        Differentiating r^d = r0^d - d t m(r0) gives the radial speed
        -m(r0) / r(t)^(d-1); the direction is the initial ray.
        """
        x0 = np.atleast_2d(np.asarray(positions0, dtype=float))
        r0 = np.sqrt(np.sum(x0 * x0, axis=1))
        rt = self.radius(r0, t)
        live = rt > 0.0
        mag = np.where(
            live, -self.mass(r0) / np.where(live, rt, 1.0) ** (self.dim - 1), 0.0
        )
        unit = x0 / np.where(r0 > 0.0, r0, 1.0)[:, None]
        return unit * mag[:, None]

    def exact_state(self, state0: ParticleState, t) -> ParticleState:
        """Exact counterpart of an initial grid state at time t."""
        if state0.t != 0.0:
            raise ValidationError(
                "exact_state labels particles by their t = 0 positions"
            )
        return ParticleState(
            float(t),
            self.trajectories(state0.positions, t),
            state0.weights,
            self.densities(state0.positions, t),
            state0.indices,
            state0.h,
            state0.dim,
        )


def newtonian_radial(profile, dim: int) -> RadialExactSolution:
    """Exact solution of the Newtonian flow for a radial initial density.

    The mass coordinate is tabulated by per-cell Gauss-Legendre
    quadrature on [0, support_radius]; evaluation adds the exact
    partial-cell integral, so m(r) carries quadrature-level accuracy at
    arbitrary radii.
    """
    if dim not in (1, 2):
        raise ValidationError(f"dimension must be 1 or 2, got {dim}")
    if not _is_radial(profile, dim):
        raise ValidationError(
            f"{type(profile).__name__} is not radial; the mass-coordinate "
            "solution requires a radial initial density"
        )
    rmax = float(profile.support_radius())
    edges = np.linspace(0.0, rmax, _CELLS + 1)
    half = 0.5 * (edges[1] - edges[0])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half * _GL_X

    pts = _radial_points(nodes.ravel(), dim)
    vals = np.asarray(profile.eval_rho0(pts), dtype=float).reshape(nodes.shape)
    cells = half * ((vals * nodes ** (dim - 1)) @ _GL_W)
    cum = np.concatenate([[0.0], np.cumsum(cells)])

    sample = np.asarray(
        profile.eval_rho0(_radial_points(np.linspace(0.0, rmax, 8193), dim)),
        dtype=float,
    )
    peak = float(np.max(sample))
    if peak <= 0.0:
        raise EmptySupportError("initial density vanishes identically")
    return RadialExactSolution(profile, dim, 1.0 / peak, edges, cum)


def quadratic_contraction(initial: ParticleState):
    """Exact flow map for the pure quadratic kernel K = |x|^2 / 2.

    The velocity field is -M (x - xbar), so every particle slides toward
    the fixed weighted mean with rate M = total mass. Mollification acts
    as the identity on quadratics, which makes this an exact oracle for
    the regularized dynamics as well. Returns positions_at(t).
    """
    m = float(np.sum(initial.weights))
    xbar = initial.weights @ initial.positions / m
    x0 = initial.positions
    t0 = initial.t

    def positions_at(t):
        return xbar + math.exp(-m * (float(t) - t0)) * (x0 - xbar)

    return positions_at


def _power_pair(kernel) -> tuple:
    if isinstance(kernel, Kernel):
        terms = kernel.terms
        if len(terms) != 2 or not all(isinstance(t, PowerLawTerm) for t in terms):
            raise ValidationError(
                "ring radius needs a kernel with exactly two power-law terms"
            )
        (a_lo, c_lo), (a_hi, c_hi) = sorted((t.a, t.coeff) for t in terms)
    else:
        a_hi, a_lo = (float(v) for v in kernel)
        c_hi, c_lo = 1.0, -1.0
    if not (a_hi > a_lo and c_hi > 0.0 > c_lo):
        raise ValidationError(
            "ring radius needs attraction at the larger exponent and "
            "repulsion at the smaller one"
        )
    return a_hi, c_hi, a_lo, c_lo


def ring_radius(kernel, n: int) -> float:
    """Equilibrium radius of n equal masses equally spaced on a circle.

    kernel is either a Kernel of two power-law terms or a pair (a, b)
    standing for |x|^a/a - |x|^b/b with a > b. The net radial force on
    one particle is driven to zero by bisection; the returned radius
    satisfies |force| < 1e-12.
    """
    a_hi, c_hi, a_lo, c_lo = _power_pair(kernel)
    n = int(n)
    if n < 2:
        raise ValidationError(f"ring needs at least 2 particles, got {n}")
    s = np.sin(np.pi * np.arange(1, n) / n)

    def force(radius):
        u = 2.0 * radius * s
        return -float(np.sum(s * (c_hi * u ** (a_hi - 1) + c_lo * u ** (a_lo - 1))))

    lo, hi = 1e-6, 8.0
    while force(hi) >= 0.0 and hi < 1e9:
        hi *= 2.0
    while force(lo) <= 0.0 and lo > 1e-15:
        lo *= 0.5
    if not force(lo) > 0.0 > force(hi):
        raise NoRootError(
            f"no force balance bracketed in [{lo:.3g}, {hi:.3g}]"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if force(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    radius = 0.5 * (lo + hi)
    if not abs(force(radius)) < 1e-12:
        raise NoRootError(
            f"bisection stalled with residual force {force(radius):.3e}"
        )
    return radius
