"""Interaction kernels K and exact evaluation of K, grad K, lap K.

A kernel is a flat sum of radial terms: power laws |x|^a / a, the Newtonian
potential (|x|/2 in 1D, log|x|/2pi in 2D), and Morse terms C e^{-|x|/l}.
Each term carries a growth order S_n bounding |grad K_n| ~ |x|^{S_n} near 0;
the kernel records s = min S_n and S = max S_n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    SingularOriginError,
    UnsupportedTermError,
    ValidationError,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PowerLawTerm:
    """coeff * |x|^a / a."""

    a: float
    coeff: float = 1.0
    form: str = "power_law"

    def validate(self, d: int) -> None:
        if not self.a > 2 - d:
            raise ValidationError(
                f"power-law exponent a={self.a} requires a > 2 - d = {2 - d}"
            )

    def growth_order(self, d: int) -> float:
        return self.a - 1.0

    # Radial profiles, vectorized over r > 0.
    def value_r(self, r, d):
        return self.coeff * np.power(r, self.a) / self.a

    def dvalue_r(self, r, d):
        return self.coeff * np.power(r, self.a - 1.0)

    def laplacian_r(self, r, d):
        return self.coeff * (self.a + d - 2.0) * np.power(r, self.a - 2.0)

    # Origin behavior.
    def value_defined_at_origin(self) -> bool:
        return self.a > 0

    def grad_defined_at_origin(self) -> bool:
        return self.a > 1  # limit of x|x|^{a-2} is 0

    def lap_defined_at_origin(self) -> bool:
        return self.a >= 2


@dataclass(frozen=True)
class NewtonianTerm:
    """coeff * fundamental solution of the Laplacian (d = 1 or 2)."""

    coeff: float = 1.0
    form: str = "newtonian"

    def validate(self, d: int) -> None:
        if d not in (1, 2):
            raise ValidationError("newtonian term implemented for d in {1, 2}")

    def growth_order(self, d: int) -> float:
        return 1.0 - d

    def value_r(self, r, d):
        if d == 1:
            return self.coeff * 0.5 * r
        return self.coeff * np.log(r) / TWO_PI

    def dvalue_r(self, r, d):
        if d == 1:
            return self.coeff * 0.5 * np.ones_like(np.asarray(r, dtype=float))
        return self.coeff / (TWO_PI * r)

    def laplacian_r(self, r, d):
        raise UnsupportedTermError(
            "Laplacian of a Newtonian term is a point mass; use the regularized kernel"
        )

    def value_defined_at_origin(self) -> bool:
        return False

    def grad_defined_at_origin(self) -> bool:
        return False

    def lap_defined_at_origin(self) -> bool:
        return False


@dataclass(frozen=True)
class MorseTerm:
    """coeff * C e^{-|x|/l}."""

    amplitude: float = 1.0
    length: float = 1.0
    coeff: float = 1.0
    form: str = "morse"

    def validate(self, d: int) -> None:
        if not self.length > 0:
            raise ValidationError("morse length must be positive")

    def growth_order(self, d: int) -> float:
        return 0.0

    def value_r(self, r, d):
        return self.coeff * self.amplitude * np.exp(-np.asarray(r, dtype=float) / self.length)

    def dvalue_r(self, r, d):
        return -(self.coeff * self.amplitude / self.length) * np.exp(
            -np.asarray(r, dtype=float) / self.length
        )

    def laplacian_r(self, r, d):
        # f'' + (d-1) f'/r for f = C e^{-r/l}; classical part only (the 1D
        # distributional atom at 0 is handled by the regularized kernel).
        r = np.asarray(r, dtype=float)
        e = np.exp(-r / self.length)
        out = e / self.length**2
        if d > 1:
            out = out - (d - 1) * e / (self.length * r)
        return self.coeff * self.amplitude * out

    def gradient_jump_1d(self) -> float:
        """Jump of dK/dr across 0 in 1D: K'(0+) - K'(0-) = -2 C coeff / l."""
        return -2.0 * self.coeff * self.amplitude / self.length

    def value_defined_at_origin(self) -> bool:
        return True

    def grad_defined_at_origin(self) -> bool:
        return False  # direction x/|x| undefined at the kink

    def lap_defined_at_origin(self) -> bool:
        return False


KernelTerm = PowerLawTerm | NewtonianTerm | MorseTerm


@dataclass(frozen=True)
class Kernel:
    """Immutable sum of radial interaction terms in dimension d."""

    terms: tuple[KernelTerm, ...]
    dim: int

    def __post_init__(self):
        if not self.terms:
            raise ValidationError("kernel needs at least one term")
        if self.dim < 1 or int(self.dim) != self.dim:
            raise ValidationError("dimension must be a positive integer")
        for t in self.terms:
            t.validate(self.dim)
        if self.s < 1 - self.dim:
            raise ValidationError("kernel growth order below 1 - d is unsupported")

    @property
    def s(self) -> float:
        return min(t.growth_order(self.dim) for t in self.terms)

    @property
    def S(self) -> float:
        return max(t.growth_order(self.dim) for t in self.terms)

    def _point(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise DimensionMismatchError(
                f"point of shape {x.shape} in a dim-{self.dim} kernel"
            )
        return x

    def value(self, x) -> float:
        x = self._point(x)
        r = float(np.sqrt(np.sum(x * x)))
        if r == 0.0:
            bad = [t.form for t in self.terms if not t.value_defined_at_origin()]
            if bad:
                raise SingularOriginError(f"K undefined at 0 for terms {bad}")
            return float(sum(t.value_r(0.0, self.dim) for t in self.terms))
        return float(sum(t.value_r(r, self.dim) for t in self.terms))

    def gradient(self, x) -> np.ndarray:
        x = self._point(x)
        r = float(np.sqrt(np.sum(x * x)))
        if r == 0.0:
            bad = [t.form for t in self.terms if not t.grad_defined_at_origin()]
            if bad:
                raise SingularOriginError(f"grad K undefined at 0 for terms {bad}")
            return np.zeros(self.dim)
        scale = sum(float(t.dvalue_r(r, self.dim)) for t in self.terms)
        return (scale / r) * x

    def laplacian(self, x) -> float:
        for t in self.terms:
            if t.form == "newtonian":
                raise UnsupportedTermError(
                    "Laplacian of a Newtonian term is a point mass; "
                    "use the regularized kernel"
                )
        x = self._point(x)
        r = float(np.sqrt(np.sum(x * x)))
        if r == 0.0:
            bad = [t.form for t in self.terms if not t.lap_defined_at_origin()]
            if bad:
                raise SingularOriginError(f"lap K undefined at 0 for terms {bad}")
            # only power laws with a >= 2 reach here; r^{a-2} -> 1 at a = 2, else 0
            return float(sum((t.a + self.dim - 2.0) * t.coeff
                             for t in self.terms if t.a == 2))
        return float(sum(t.laplacian_r(r, self.dim) for t in self.terms))


def power_law(a: float, dim: int, coeff: float = 1.0) -> Kernel:
    return Kernel((PowerLawTerm(a=float(a), coeff=float(coeff)),), dim)


def newtonian(dim: int, coeff: float = 1.0) -> Kernel:
    return Kernel((NewtonianTerm(coeff=coeff),), dim)


def morse(pairs, dim: int) -> Kernel:
    """Kernel from (amplitude, length, coeff) triples."""
    return Kernel(tuple(MorseTerm(amplitude=c, length=l, coeff=s) for c, l, s in pairs), dim)


_FORM_KEYS = {
    "power_law": ("a",),
    "newtonian": (),
    "morse": ("C", "l"),
}


def term_from_config(cfg: dict) -> KernelTerm:
    form = cfg.get("form")
    coeff = float(cfg.get("coeff", 1.0))
    if form == "power_law":
        return PowerLawTerm(a=float(cfg["a"]), coeff=coeff)
    if form == "newtonian":
        return NewtonianTerm(coeff=coeff)
    if form == "morse":
        return MorseTerm(amplitude=float(cfg["C"]), length=float(cfg["l"]), coeff=coeff)
    raise ValidationError(f"unknown kernel term form {form!r}")


def kernel_from_config(cfg: dict) -> Kernel:
    try:
        terms = tuple(term_from_config(t) for t in cfg["terms"])
        dim = int(cfg["dim"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad kernel config: {exc}") from exc
    return Kernel(terms, dim)


def kernel_to_config(k: Kernel) -> dict:
    terms = []
    for t in k.terms:
        if isinstance(t, PowerLawTerm):
            terms.append({"form": "power_law", "a": t.a, "coeff": t.coeff})
        elif isinstance(t, NewtonianTerm):
            terms.append({"form": "newtonian", "coeff": t.coeff})
        else:
            terms.append({"form": "morse", "C": t.amplitude, "l": t.length, "coeff": t.coeff})
    return {"terms": terms, "dim": k.dim}
