"""Gaussian-mixture mollifiers with exact moment arithmetic.

A mollifier of order m is psi(x) = sum_k A_k exp(-|x|^2 / w_k^2) with unit
integral and vanishing moments through order m - 1.  Moments of Gaussian
mixtures factor into 1D integrals, so they are evaluated in closed form
rather than by quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

INTEGRAL_TOL = 1e-10
MOMENT_TOL = 1e-8


def _gauss_moment_1d(order: int, width: float) -> float:
    """Integral of t^order exp(-t^2/width^2) over the line."""
    if order % 2 == 1:
        return 0.0
    return width ** (order + 1) * math.gamma((order + 1) / 2.0)


@dataclass(frozen=True)
class Mollifier:
    """Radial Gaussian mixture sum_k A_k exp(-|x|^2 / w_k^2)."""

    dim: int
    order: int
    components: tuple[tuple[float, float], ...]
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 1 or int(self.dim) != self.dim:
            raise ValidationError("mollifier dimension must be a positive integer")
        if self.order < 2 or self.order % 2 != 0:
            raise ValidationError("mollifier order must be a positive even integer")
        if not self.components:
            raise ValidationError("mollifier needs at least one Gaussian component")
        for _, w in self.components:
            if not w > 0:
                raise ValidationError("Gaussian widths must be positive")
        self.verify_order()

    def verify_order(self) -> None:
        """Check unit mass and vanishing moments 1 .. order-1."""
        mass = self.moment((0,) * self.dim)
        if abs(mass - 1.0) > INTEGRAL_TOL:
            raise ValidationError(f"mollifier integral {mass!r} is not 1")
        for total in range(1, self.order):
            for gamma in _multi_indices(self.dim, total):
                mom = self.moment(gamma)
                if abs(mom) > MOMENT_TOL:
                    raise ValidationError(
                        f"moment {gamma} = {mom!r} violates order {self.order}"
                    )

    def moment(self, gamma) -> float:
        """Exact moment  integral of x^gamma psi(x) dx  for |gamma| <= order + 2."""
        if isinstance(gamma, int):
            gamma = (gamma,)
        gamma = tuple(int(g) for g in gamma)
        if len(gamma) != self.dim:
            raise DimensionMismatchError(
                f"multi-index of length {len(gamma)} in dimension {self.dim}"
            )
        if any(g < 0 for g in gamma):
            raise ValidationError("multi-index entries must be nonnegative")
        if sum(gamma) > self.order + 2:
            raise ValidationError(
                f"moments above order {self.order + 2} are outside the contract"
            )
        total = 0.0
        for amp, width in self.components:
            prod = amp
            for g in gamma:
                prod *= _gauss_moment_1d(g, width)
            total += prod
        return total

    def value(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise DimensionMismatchError(
                f"point of shape {x.shape} in a dim-{self.dim} mollifier"
            )
        return float(self.value_r(np.linalg.norm(x)))

    def value_r(self, r):
        """Radial profile psi(r), vectorized."""
        r2 = np.square(np.asarray(r, dtype=float))
        out = np.zeros_like(r2)
        for amp, width in self.components:
            out += amp * np.exp(-r2 / width**2)
        return out

    def scaled_value_r(self, r, delta: float):
        """psi_delta(r) = delta^-d psi(r / delta), vectorized."""
        if not delta > 0:
            raise ValidationError("delta must be positive")
        return self.value_r(np.asarray(r, dtype=float) / delta) / delta**self.dim

    def scaled_components(self, delta: float) -> tuple[tuple[float, float], ...]:
        """Components (A_k delta^-d, w_k delta) of psi_delta."""
        if not delta > 0:
            raise ValidationError("delta must be positive")
        return tuple((amp / delta**self.dim, width * delta)
                     for amp, width in self.components)


def _multi_indices(dim: int, total: int):
    if dim == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _multi_indices(dim - 1, total - head):
            yield (head,) + rest


_SQRT_PI = math.sqrt(math.pi)

_PSI4_1D_COMPONENTS = (
    (4.0 / (3.0 * _SQRT_PI), 1.0),
    (-1.0 / (6.0 * _SQRT_PI), 2.0),
)

# psi6 = (16/15) psi4(x) - (1/30) psi4(x/2), components left unmerged
_PSI6_1D_COMPONENTS = (
    ((16.0 / 15.0) * (4.0 / (3.0 * _SQRT_PI)), 1.0),
    ((16.0 / 15.0) * (-1.0 / (6.0 * _SQRT_PI)), 2.0),
    ((-1.0 / 30.0) * (4.0 / (3.0 * _SQRT_PI)), 2.0),
    ((-1.0 / 30.0) * (-1.0 / (6.0 * _SQRT_PI)), 4.0),
)

_PSI4_2D_COMPONENTS = (
    (2.0 / math.pi, 1.0),
    (-1.0 / (2.0 * math.pi), math.sqrt(2.0)),
)

_BUILTINS = {
    "psi4_1d": Mollifier(dim=1, order=4, components=_PSI4_1D_COMPONENTS, name="psi4_1d"),
    "psi6_1d": Mollifier(dim=1, order=6, components=_PSI6_1D_COMPONENTS, name="psi6_1d"),
    "psi4_2d": Mollifier(dim=2, order=4, components=_PSI4_2D_COMPONENTS, name="psi4_2d"),
}


def builtin(name: str) -> Mollifier:
    try:
        return _BUILTINS[name]
    except KeyError:
        raise ValidationError(
            f"unknown mollifier {name!r}; available: {sorted(_BUILTINS)}"
        ) from None


def builtin_names() -> tuple[str, ...]:
    return tuple(sorted(_BUILTINS))


def mollifier_from_config(cfg: dict) -> Mollifier:
    if "name" in cfg:
        return builtin(cfg["name"])
    try:
        return Mollifier(
            dim=int(cfg["dim"]),
            order=int(cfg["order"]),
            components=tuple((float(a), float(w)) for a, w in cfg["components"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad mollifier config: {exc}") from exc


def mollifier_to_config(psi: Mollifier) -> dict:
    if psi.name in _BUILTINS:
        return {"name": psi.name}
    return {
        "dim": psi.dim,
        "order": psi.order,
        "components": [[a, w] for a, w in psi.components],
    }
