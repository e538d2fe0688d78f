"""Initial densities and their lattice discretization.

Profiles evaluate rho0 pointwise; discretize() samples them on the lattice
h Z^d (origin on-grid), keeping every node where rho0 > 0.  Indicator
boundaries land on lattice nodes for commensurate h and are kept.  Weights
are m_i = rho0(x_i) h^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptySupportError, ValidationError


@dataclass(frozen=True)
class PolyBump:
    """(1 - |x|^2)_+^p."""

    p: float = 2.0

    def __post_init__(self):
        if not self.p > 0:
            raise ValidationError("poly_bump exponent must be positive")

    def eval_rho0(self, x: np.ndarray) -> np.ndarray:
        r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
        return np.where(r2 < 1.0, np.power(np.maximum(1.0 - r2, 0.0), self.p), 0.0)

    def support_radius(self) -> float:
        return 1.0

    def mass(self, dim: int) -> float:
        if dim == 1:
            return math.sqrt(math.pi) * math.gamma(self.p + 1) / math.gamma(self.p + 1.5)
        return math.pi / (self.p + 1.0)


@dataclass(frozen=True)
class IndicatorBall:
    """1 on |x| <= radius, boundary included."""

    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("indicator radius must be positive")

    def eval_rho0(self, x: np.ndarray) -> np.ndarray:
        r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
        return np.where(r2 <= self.radius**2, 1.0, 0.0)

    def support_radius(self) -> float:
        return self.radius

    def mass(self, dim: int) -> float:
        return 2.0 * self.radius if dim == 1 else math.pi * self.radius**2


@dataclass(frozen=True)
class IndicatorBox:
    """1 on the closed box prod [-w_j, w_j]."""

    halfwidths: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if not all(w > 0 for w in self.halfwidths):
            raise ValidationError("box halfwidths must be positive")

    def eval_rho0(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[-1] != len(self.halfwidths):
            raise DimensionMismatchError(
                f"box of dim {len(self.halfwidths)} evaluated at dim {x.shape[-1]}"
            )
        w = np.asarray(self.halfwidths)
        inside = np.all(np.abs(x) <= w, axis=-1)
        return np.where(inside, 1.0, 0.0)

    def support_radius(self) -> float:
        return max(self.halfwidths)

    def mass(self, dim: int) -> float:
        if dim != len(self.halfwidths):
            raise DimensionMismatchError("box dimension mismatch")
        return float(np.prod([2.0 * w for w in self.halfwidths]))


@dataclass(frozen=True)
class SmoothBump:
    """exp(1 / (|x|^2 - 1)) on |x| < 1, extended by 0."""

    def eval_rho0(self, x: np.ndarray) -> np.ndarray:
        r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
        out = np.zeros_like(r2)
        inside = r2 < 1.0
        with np.errstate(divide="ignore"):
            out = np.where(inside, np.exp(1.0 / np.where(inside, r2 - 1.0, -1.0)), 0.0)
        return out

    def support_radius(self) -> float:
        return 1.0

    def mass(self, dim: int) -> float:
        from scipy import integrate

        if dim == 1:
            val, _ = integrate.quad(lambda t: math.exp(1.0 / (t * t - 1.0)),
                                    -1.0, 1.0, epsabs=1e-13)
        else:
            val, _ = integrate.quad(
                lambda r: 2.0 * math.pi * r * math.exp(1.0 / (r * r - 1.0)),
                0.0, 1.0, epsabs=1e-13)
        return val


@dataclass(frozen=True)
class StarPatch:
    """Indicator of r <= (sin^2(5 theta / 2) + 1/2) / 4; a five-armed patch."""

    def eval_rho0(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[-1] != 2:
            raise DimensionMismatchError("star patch is two-dimensional")
        r = np.hypot(x[..., 0], x[..., 1])
        theta = np.arctan2(x[..., 1], x[..., 0])
        edge = (np.sin(2.5 * theta) ** 2 + 0.5) / 4.0
        return np.where(r <= edge, 1.0, 0.0)

    def support_radius(self) -> float:
        return 0.375  # (1 + 1/2) / 4

    def mass(self, dim: int) -> float:
        if dim != 2:
            raise DimensionMismatchError("star patch is two-dimensional")
        # area = (1/2) int R(theta)^2 with sin^2 -> 1/2, sin^4 -> 3/8
        return 0.5 * ((3.0 / 8.0) * 2 * math.pi + math.pi + 0.25 * 2 * math.pi) / 16.0


@dataclass(frozen=True)
class Scaled:
    """factor * rho0 for an inner profile."""

    inner: object
    factor: float

    def eval_rho0(self, x: np.ndarray) -> np.ndarray:
        return self.factor * self.inner.eval_rho0(x)

    def support_radius(self) -> float:
        return self.inner.support_radius()

    def mass(self, dim: int) -> float:
        return self.factor * self.inner.mass(dim)


def normalized(profile, dim: int):
    """Scale a profile to unit mass."""
    return Scaled(profile, 1.0 / profile.mass(dim))


@dataclass(frozen=True)
class ParticleGrid:
    """Lattice sample of an initial density."""

    indices: np.ndarray   # (N, d) lattice indices
    positions: np.ndarray  # (N, d) = h * indices
    weights: np.ndarray    # (N,) = rho0 * h^d
    rho0: np.ndarray       # (N,)
    h: float
    dim: int

    def __post_init__(self):
        for arr in (self.indices, self.positions, self.weights, self.rho0):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


def discretize(profile, h: float, dim: int) -> ParticleGrid:
    """Sample rho0 on h Z^d, keeping nodes with rho0 > 0."""
    if not 0 < h <= 0.5:
        raise ValidationError(f"spacing h={h} must lie in (0, 0.5]")
    if dim not in (1, 2):
        raise ValidationError("dimension must be 1 or 2")
    R = profile.support_radius()
    # half-ulp slack so boundary nodes at exactly R survive the range cut
    imax = int(math.floor(R / h + 1e-9))
    axis = np.arange(-imax, imax + 1)
    if dim == 1:
        idx = axis[:, None]
    else:
        ii, jj = np.meshgrid(axis, axis, indexing="ij")
        idx = np.column_stack([ii.ravel(), jj.ravel()])
    pos = h * idx.astype(float)
    rho = np.asarray(profile.eval_rho0(pos), dtype=float).reshape(-1)
    keep = rho > 0.0
    if not keep.any():
        raise EmptySupportError(
            f"no lattice nodes with rho0 > 0 at h={h}; support radius {R}"
        )
    idx = np.ascontiguousarray(idx[keep])
    pos = np.ascontiguousarray(pos[keep])
    rho = rho[keep]
    return ParticleGrid(indices=idx, positions=pos, weights=rho * h**dim,
                        rho0=rho, h=float(h), dim=dim)


_PROFILES = {
    "poly_bump": lambda cfg: PolyBump(p=float(cfg.get("p", 2.0))),
    "indicator_ball": lambda cfg: IndicatorBall(radius=float(cfg.get("radius", 1.0))),
    "indicator_box": lambda cfg: IndicatorBox(
        halfwidths=tuple(float(w) for w in cfg.get("halfwidths", [1.0]))),
    "smooth_bump": lambda cfg: SmoothBump(),
    "star_patch": lambda cfg: StarPatch(),
}


def profile_from_config(cfg: dict):
    name = cfg.get("profile")
    if name not in _PROFILES:
        raise ValidationError(
            f"unknown profile {name!r}; available: {sorted(_PROFILES)}"
        )
    prof = _PROFILES[name](cfg)
    if "scale" in cfg:
        prof = Scaled(prof, float(cfg["scale"]))
    if cfg.get("normalize"):
        dim = cfg.get("dim")
        if dim is None:
            raise ValidationError("normalize requires 'dim' in the profile config")
        prof = normalized(prof, int(dim))
    return prof
