"""Particle evolution of the nonlocal aggregation dynamics.

Two method variants share one state type: the blob method moves particles
with the regularized kernel and carries a per-particle density solving
d rho_i/dt = -(div v)_i rho_i, while the raw particle baseline moves
positions only, with the kernel gradient zeroed at the origin.

Time integration is adaptive RK45 (scipy) by default; a fixed-step RK4 is
provided for step-size studies.  Both are deterministic for a fixed
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import pairwise
from .errors import (
    DimensionMismatchError,
    IndexMismatchError,
    NaNDetectedError,
    StepSizeUnderflowError,
    ValidationError,
    VariantMismatchError,
)
from .initial_data import ParticleGrid
from .kernels import Kernel
from .regkernel import RegularizedKernel

_DENSITY_FLOOR = -1e-12


def _frozen(a, dtype=float):
    arr = np.asarray(a, dtype=dtype)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ParticleState:
    """Immutable snapshot of the particle system at one time."""

    t: float
    positions: np.ndarray  # (n, d)
    weights: np.ndarray    # (n,), constant along the evolution
    densities: np.ndarray  # (n,)
    indices: np.ndarray    # (n, d) origin lattice labels
    h: float
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen(self.positions))
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "densities", _frozen(self.densities))
        object.__setattr__(self, "indices", _frozen(self.indices, np.int64))
        n = self.positions.shape[0]
        if self.positions.ndim != 2 or self.positions.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"positions of shape {self.positions.shape} in dimension {self.dim}"
            )
        if self.weights.shape != (n,) or self.densities.shape != (n,):
            raise IndexMismatchError(
                "weights and densities must have one entry per particle"
            )
        if self.indices.shape != (n, self.dim):
            raise IndexMismatchError(
                f"indices of shape {self.indices.shape} for {n} particles"
            )

    @classmethod
    def from_grid(cls, grid: ParticleGrid, t: float = 0.0) -> "ParticleState":
        return cls(t=float(t), positions=grid.positions, weights=grid.weights,
                   densities=grid.rho0, indices=grid.indices, h=grid.h,
                   dim=grid.dim)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class BlobMethod:
    """Regularized dynamics: velocities from grad K_delta, densities evolved."""

    reg: RegularizedKernel
    backend: str | None = None

    @property
    def dim(self) -> int:
        return self.reg.dim


@dataclass(frozen=True)
class ParticleMethod:
    """Raw-kernel baseline with grad K(0) := 0; positions only."""

    kernel: Kernel
    backend: str | None = None

    @property
    def dim(self) -> int:
        return self.kernel.dim


Method = BlobMethod | ParticleMethod


@dataclass(frozen=True)
class IntegratorConfig:
    """Time stepping: adaptive_rk45(rtol, atol) or rk4_fixed(dt)."""

    scheme: str = "adaptive_rk45"
    rtol: float = 1e-10
    atol: float = 1e-12
    dt: float | None = None
    max_step: float = np.inf

    def __post_init__(self):
        if self.scheme not in ("adaptive_rk45", "rk4_fixed"):
            raise ValidationError(f"unknown integrator scheme {self.scheme!r}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValidationError("integrator tolerances must be positive")
        if self.scheme == "rk4_fixed" and not (self.dt and self.dt > 0):
            raise ValidationError("rk4_fixed requires a positive dt")


def _check_method(state: ParticleState, method: Method) -> None:
    if state.dim != method.dim:
        raise DimensionMismatchError(
            f"state dimension {state.dim} != method dimension {method.dim}"
        )


def velocity(state: ParticleState, method: Method) -> np.ndarray:
    """Particle velocities v_i = -sum_j grad K(X_i - X_j) m_j, shape (n, d)."""
    _check_method(state, method)
    if isinstance(method, BlobMethod):
        v, _ = pairwise.blob_velocity_div(state.positions, state.weights,
                                          method.reg, backend=method.backend)
        return v
    return pairwise.particle_velocity(state.positions, state.weights,
                                      method.kernel, backend=method.backend)


def divergence(state: ParticleState, method: Method) -> np.ndarray:
    """Velocity divergence at the particles (blob variant only)."""
    _check_method(state, method)
    if not isinstance(method, BlobMethod):
        raise VariantMismatchError(
            "velocity divergence requires the blob variant; the raw particle "
            "baseline does not evolve densities"
        )
    _, div = pairwise.blob_velocity_div(state.positions, state.weights,
                                        method.reg, backend=method.backend)
    return div


def rhs(state: ParticleState, method: Method):
    """Time derivative (dX/dt, d rho/dt); the density slot is None for the
    particle variant."""
    _check_method(state, method)
    if isinstance(method, BlobMethod):
        v, div = pairwise.blob_velocity_div(state.positions, state.weights,
                                            method.reg, backend=method.backend)
        return v, -div * state.densities
    v = pairwise.particle_velocity(state.positions, state.weights,
                                   method.kernel, backend=method.backend)
    return v, None


def _ode_fun(method: Method, weights, n, d, evolve_density):
    if isinstance(method, BlobMethod):
        def fun(t, y):
            if not np.all(np.isfinite(y)):
                raise NaNDetectedError(f"non-finite state at t = {t:.6g}")
            pos = y[: n * d].reshape(n, d)
            v, div = pairwise.blob_velocity_div(pos, weights, method.reg,
                                                backend=method.backend)
            if evolve_density:
                rho = y[n * d:]
                return np.concatenate([v.ravel(), -div * rho])
            return v.ravel()
    else:
        def fun(t, y):
            if not np.all(np.isfinite(y)):
                raise NaNDetectedError(f"non-finite state at t = {t:.6g}")
            pos = y.reshape(n, d)
            v = pairwise.particle_velocity(pos, weights, method.kernel,
                                           backend=method.backend)
            return v.ravel()
    return fun


def _rk4_sweep(fun, t0, y0, stops, dt):
    """Classic RK4 with fixed dt, stepping exactly onto each stop time."""
    out = []
    t, y = t0, y0
    for stop in stops:
        while True:
            rem = stop - t
            if rem <= 1e-14 * max(1.0, abs(stop)):
                break
            step = dt if rem > dt else rem
            k1 = fun(t, y)
            k2 = fun(t + 0.5 * step, y + 0.5 * step * k1)
            k3 = fun(t + 0.5 * step, y + 0.5 * step * k2)
            k4 = fun(t + step, y + step * k3)
            y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = stop if rem <= dt else t + step
        t = stop
        out.append(y)
    return out


def integrate(state0: ParticleState, method: Method,
              cfg: IntegratorConfig | None = None, t_end: float | None = None,
              sample_times=None) -> list[ParticleState]:
    """Evolve the system to t_end, returning states at the sample times
    (default: t_end only)."""
    _check_method(state0, method)
    cfg = cfg if cfg is not None else IntegratorConfig()
    if t_end is None:
        raise ValidationError("integrate requires t_end")
    t0 = state0.t
    if t_end < t0:
        raise ValidationError(f"t_end {t_end} before initial time {t0}")
    if sample_times is None:
        sample = np.array([float(t_end)])
    else:
        sample = np.asarray(sample_times, dtype=float)
        if sample.ndim != 1 or sample.size == 0:
            raise ValidationError("sample_times must be a nonempty 1D list")
        if np.any(np.diff(sample) <= 0):
            raise ValidationError("sample_times must be strictly increasing")
        if sample[0] < t0 or sample[-1] > t_end:
            raise ValidationError(
                f"sample_times must lie within [{t0}, {t_end}]"
            )
    if t_end == t0:
        return [state0]

    n, d = state0.n, state0.dim
    evolve_density = isinstance(method, BlobMethod)
    if evolve_density:
        y0 = np.concatenate([state0.positions.ravel(),
                             state0.densities])
    else:
        y0 = state0.positions.ravel().copy()
    if not np.all(np.isfinite(y0)):
        raise NaNDetectedError("non-finite initial state")
    fun = _ode_fun(method, state0.weights, n, d, evolve_density)

    # only lead with the initial state if it was explicitly sampled
    head = []
    solve_for = sample
    if sample[0] == t0:
        head = [state0]
        solve_for = sample[1:]
    if solve_for.size == 0:
        return head

    if cfg.scheme == "rk4_fixed":
        ys = _rk4_sweep(fun, t0, y0, solve_for, cfg.dt)
    else:
        # remember how far the stepper got; on failure the sampled times in
        # sol.t may be empty while the true frontier sits between samples
        frontier = [t0]

        def tracked(t, y):
            if t > frontier[0]:
                frontier[0] = t
            return fun(t, y)

        sol = solve_ivp(tracked, (t0, float(t_end)), y0, method="RK45",
                        rtol=cfg.rtol, atol=cfg.atol, t_eval=solve_for,
                        max_step=cfg.max_step)
        if not sol.success:
            t_reached = float(frontier[0])
            raise StepSizeUnderflowError(
                f"{sol.message} (reached t = {t_reached:.6g})", t_reached
            )
        ys = [sol.y[:, k] for k in range(sol.y.shape[1])]

    clamp = evolve_density and bool(np.all(state0.densities >= 0.0))
    states = list(head)
    for t_k, y_k in zip(solve_for, ys):
        if not np.all(np.isfinite(y_k)):
            raise NaNDetectedError(f"non-finite state sampled at t = {t_k:.6g}")
        pos = y_k[: n * d].reshape(n, d).copy()
        if evolve_density:
            rho = y_k[n * d:].copy()
            if clamp:
                # the exact density ODE preserves sign; forgive roundoff dips
                rho[(rho < 0.0) & (rho >= _DENSITY_FLOOR)] = 0.0
        else:
            rho = state0.densities
        states.append(ParticleState(
            t=float(t_k), positions=pos, weights=state0.weights,
            densities=rho, indices=state0.indices, h=state0.h, dim=d))
    return states


def trace_offgrid(states, method: Method, alpha, sample_times=None,
                  cfg: IntegratorConfig | None = None) -> np.ndarray:
    """Trajectory of an off-grid tracer released at alpha at the first
    state's time, following the blob velocity field with grid-particle
    positions interpolated cubically in time.  Returns positions of shape
    (len(sample_times), d); sample_times defaults to the states' times."""
    if not isinstance(method, BlobMethod):
        raise VariantMismatchError(
            "off-grid tracing is defined for the blob variant"
        )
    states = list(states)
    if len(states) < 4:
        raise ValidationError(
            "off-grid tracing needs at least 4 sampled states for the "
            "cubic-in-time interpolation"
        )
    times = np.array([s.t for s in states])
    if np.any(np.diff(times) <= 0):
        raise ValidationError("states must be strictly increasing in time")
    d = states[0].dim
    _check_method(states[0], method)
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.shape != (d,):
        raise DimensionMismatchError(
            f"tracer point of shape {alpha.shape} in dimension {d}"
        )
    if sample_times is None:
        sample = times
    else:
        sample = np.atleast_1d(np.asarray(sample_times, dtype=float))
        if sample.size == 0 or np.any(np.diff(sample) <= 0):
            raise ValidationError("sample_times must be strictly increasing")
        if sample[0] < times[0] or sample[-1] > times[-1]:
            raise ValidationError(
                f"tracer times must lie within [{times[0]}, {times[-1]}]"
            )
    cfg = cfg if cfg is not None else IntegratorConfig()
    weights = states[0].weights
    path = CubicSpline(times, np.stack([s.positions for s in states]), axis=0)

    def fun(t, y):
        if not np.all(np.isfinite(y)):
            raise NaNDetectedError(f"non-finite tracer at t = {t:.6g}")
        v = pairwise.blob_velocity_at(y[None, :], path(t), weights,
                                      method.reg, backend=method.backend)
        return v[0]

    frontier = [times[0]]

    def tracked(t, y):
        if t > frontier[0]:
            frontier[0] = t
        return fun(t, y)

    sol = solve_ivp(tracked, (times[0], times[-1]), alpha, method="RK45",
                    rtol=cfg.rtol, atol=cfg.atol, t_eval=sample,
                    max_step=cfg.max_step)
    if not sol.success:
        t_reached = float(frontier[0])
        raise StepSizeUnderflowError(
            f"{sol.message} (reached t = {t_reached:.6g})", t_reached
        )
    return sol.y.T.copy()
