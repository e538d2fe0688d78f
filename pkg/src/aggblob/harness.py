"""Convergence studies, single-run simulations, presets, and result files.

A study sweeps a decreasing list of grid spacings, integrates each
discretization to a common evaluation time, measures errors against a
reference (exact oracle, fine-grid run, or user callable), and fits
log-log rates. A simulation is one run sampled at evenly spaced frames.
Both configs are frozen, validated at construction, and round-trip
through plain JSON dicts, so the command line is a thin wrapper.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IndexMismatchError, UnknownPresetError, ValidationError
from .initial_data import (IndicatorBall, IndicatorBox, PolyBump, Scaled,
                           SmoothBump, StarPatch, discretize, normalized,
                           profile_from_config)
from .kernels import (Kernel, NewtonianTerm, PowerLawTerm, kernel_from_config,
                      kernel_to_config, morse, newtonian, power_law)
from .mollifiers import builtin
from .norms import GridFunction, dual_norm_2, lp_norm, resolve_norm
from .oracles import newtonian_radial
from .regkernel import TableConfig, build
from .solver import (BlobMethod, IntegratorConfig, ParticleMethod,
                     ParticleState, integrate, velocity)

OBSERVABLES = ("trajectory", "velocity", "density")


def _check_common(dim, kernel, mollifier, method):
    if dim not in (1, 2):
        raise ValidationError(f"dimension must be 1 or 2, got {dim}")
    if kernel.dim != dim:
        raise ValidationError(
            f"kernel dimension {kernel.dim} does not match config dimension {dim}"
        )
    if method not in ("blob", "particle"):
        raise ValidationError(f"method must be 'blob' or 'particle', got {method!r}")
    psi = builtin(mollifier)
    if psi.dim != dim:
        raise ValidationError(
            f"mollifier {mollifier!r} is {psi.dim}D but the config is {dim}D"
        )


def _make_method(kernel, mollifier, delta, method, table):
    if method == "particle":
        return ParticleMethod(kernel)
    return BlobMethod(build(kernel, builtin(mollifier), delta, table=table))


@dataclass(frozen=True)
class SimulationConfig:
    """One run: discretize at spacing h, integrate to t_end, keep n_frames.

    The regularization defaults to delta = h**q; an explicit delta
    overrides it (used to demonstrate over-smoothed dynamics).
    """

    name: str
    kernel: Kernel
    mollifier: str
    profile: object
    dim: int
    h: float
    t_end: float
    q: float = 0.9
    delta: float | None = None
    method: str = "blob"
    table: TableConfig | None = None
    n_frames: int = 11

    def __post_init__(self):
        if not self.name:
            raise ValidationError("simulation needs a nonempty name")
        _check_common(self.dim, self.kernel, self.mollifier, self.method)
        if not 0 < self.h <= 0.5:
            raise ValidationError(f"spacing h={self.h} must lie in (0, 0.5]")
        if self.delta is None and not 0.5 < self.q < 1:
            raise ValidationError(f"q={self.q} must lie in (0.5, 1)")
        if not 0 < self.delta_eff <= 0.5:
            raise ValidationError(
                f"regularization delta={self.delta_eff:.6g} must lie in (0, 0.5]"
            )
        if not self.t_end > 0:
            raise ValidationError("t_end must be positive")
        if self.n_frames < 2:
            raise ValidationError("need at least 2 frames")

    @property
    def delta_eff(self) -> float:
        return float(self.delta) if self.delta is not None else self.h**self.q

    def sample_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_frames)


@dataclass(frozen=True)
class StudyConfig:
    """Grid refinement study measured against a reference solution.

    reference is "exact_oracle", ("fine_grid", h_ref) with h_ref dividing
    every study spacing, or a callable (grid, final_state, t) ->
    (positions, velocities, densities) for synthetic references in tests.
    """

    name: str
    kernel: Kernel
    mollifier: str
    profile: object
    dim: int
    h_list: tuple[float, ...]
    t_eval: float
    q: float = 0.9
    method: str = "blob"
    norms: tuple[str, ...] = ("l1",)
    observables: tuple[str, ...] = ("trajectory", "density")
    reference: object = "exact_oracle"
    table: TableConfig | None = None
    ball: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "h_list", tuple(float(h) for h in self.h_list))
        object.__setattr__(self, "norms", tuple(str(n) for n in self.norms))
        object.__setattr__(self, "observables",
                           tuple(str(o) for o in self.observables))
        if not self.name:
            raise ValidationError("study needs a nonempty name")
        _check_common(self.dim, self.kernel, self.mollifier, self.method)
        if not 0.5 < self.q < 1:
            raise ValidationError(f"q={self.q} must lie in (0.5, 1)")
        if not self.h_list:
            raise ValidationError("h_list must not be empty")
        for h in self.h_list:
            if not 0 < h <= 0.5:
                raise ValidationError(f"spacing h={h} must lie in (0, 0.5]")
            if h**self.q > 0.5:
                raise ValidationError(
                    f"delta = {h}^{self.q} = {h**self.q:.6g} exceeds 0.5"
                )
        if any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ValidationError("h_list must be strictly decreasing")
        if not self.t_eval > 0:
            raise ValidationError("t_eval must be positive")
        if not self.norms:
            raise ValidationError("need at least one norm")
        for n in self.norms:
            resolve_norm(n)
        if not self.observables:
            raise ValidationError("need at least one observable")
        for o in self.observables:
            if o not in OBSERVABLES:
                raise ValidationError(
                    f"unknown observable {o!r}; choose from {OBSERVABLES}"
                )
        if self.method == "particle" and "density" in self.observables:
            raise ValidationError(
                "the particle variant does not evolve densities"
            )
        if self.ball is not None and not self.ball > 0:
            raise ValidationError("ball radius must be positive")
        self._check_reference()

    def _check_reference(self):
        ref = self.reference
        if ref == "exact_oracle" or callable(ref):
            return
        if (isinstance(ref, tuple) and len(ref) == 2 and ref[0] == "fine_grid"):
            h_ref = float(ref[1])
            if not 0 < h_ref <= 0.5:
                raise ValidationError(f"reference spacing {h_ref} out of (0, 0.5]")
            for h in self.h_list:
                ratio = h / h_ref
                if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 2:
                    raise ValidationError(
                        f"fine spacing {h_ref} must divide study spacing {h}"
                    )
            return
        raise ValidationError(
            "reference must be 'exact_oracle', ('fine_grid', h_ref), or a callable"
        )

    def delta_list(self) -> tuple[float, ...]:
        return tuple(h**self.q for h in self.h_list)


@dataclass(frozen=True)
class ConvergenceRow:
    """Errors of one study resolution: (observable, norm, value) triples."""

    h: float
    delta: float
    errors: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        for obs, nm, v in self.errors:
            if not (np.isfinite(v) and v >= 0):
                raise ValidationError(
                    f"error {obs}/{nm} at h={self.h} is {v}; must be finite "
                    "and nonnegative"
                )

    def error(self, observable: str, norm: str) -> float:
        for obs, nm, v in self.errors:
            if obs == observable and nm == norm:
                return v
        raise KeyError((observable, norm))


@dataclass(frozen=True)
class ConvergenceReport:
    """Error table of a completed study plus fitted log-log rates."""

    config: StudyConfig
    rows: tuple[ConvergenceRow, ...]

    def slope(self, observable: str, norm: str):
        """Fitted rate, or None with fewer than three rows or a zero error."""
        if len(self.rows) < 3:
            return None
        pts = [(r.h, r.error(observable, norm)) for r in self.rows]
        if any(e <= 0 for _, e in pts):
            return None
        return fit_rate(pts)

    def slopes(self) -> dict:
        out = {}
        for obs in self.config.observables:
            for nm in self.config.norms:
                s = self.slope(obs, nm)
                if s is not None:
                    out[f"{obs}_{nm}"] = s
        return out

    def predicted(self) -> float:
        """Heuristic target rate m*q from the mollifier moment order."""
        return builtin(self.config.mollifier).order * self.config.q

    def to_csv(self, loglog: bool = False) -> str:
        """Error table as CSV text; repr floats keep it byte-reproducible.

        loglog appends base-10 log columns ready for straight-line fits.
        """
        cols = [f"{obs}_{nm}" for obs in self.config.observables
                for nm in self.config.norms]
        header = ["h", "delta", *cols]
        if loglog:
            header += ["log10_h", *(f"log10_{c}" for c in cols)]
        lines = [",".join(header)]
        for r in self.rows:
            vals = [r.error(obs, nm) for obs in self.config.observables
                    for nm in self.config.norms]
            cells = [repr(r.h), repr(r.delta), *(repr(v) for v in vals)]
            if loglog:
                cells.append(repr(math.log10(r.h)))
                cells += [repr(math.log10(v)) if v > 0 else "nan" for v in vals]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def metadata(self) -> dict:
        cfg = study_to_config(self.config)
        return {
            "config": cfg,
            "config_sha256": config_hash(cfg),
            "predicted_rate": self.predicted(),
            "slopes": self.slopes(),
            "versions": _versions(),
        }


def fit_rate(points) -> float:
    """Least-squares slope of log error against log spacing.

    points is an iterable of (h, error) pairs; at least two distinct
    spacings with strictly positive errors are required.
    """
    pts = [(float(h), float(e)) for h, e in points]
    if len(pts) < 2:
        raise ValidationError("rate fit needs at least two points")
    h = np.array([p[0] for p in pts])
    e = np.array([p[1] for p in pts])
    if np.any(h <= 0):
        raise ValidationError("spacings must be positive")
    if np.unique(h).size < 2:
        raise ValidationError("rate fit needs at least two distinct spacings")
    if np.any(e <= 0):
        raise ValidationError("errors must be strictly positive to fit a rate")
    if np.all(e == e[0]):
        return 0.0  # flat data; keep the fit free of roundoff
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


def predicted_rate(m, q, L, s, d, delta):
    """Expected rate m*q and derivative-growth factor for an L-th derivative.

    Below the critical order L = s + d the mollified kernel's derivative
    norms stay bounded (factor 1); at the critical order they grow like
    |log delta|; beyond it like delta^-(L - s - d).
    """
    delta = float(delta)
    if not 0 < delta <= 0.5:
        raise ValidationError(f"delta={delta} must lie in (0, 1/2]")
    crit = s + d
    if L < crit:
        g = 1.0
    elif L == crit:
        g = abs(math.log(delta))
    else:
        g = delta ** (crit - L)
    return float(m) * float(q), g


def _oracle_reference(cfg: StudyConfig):
    terms = cfg.kernel.terms
    if len(terms) == 1 and isinstance(terms[0], NewtonianTerm):
        if terms[0].coeff != 1.0:
            raise ValidationError(
                "the radial oracle covers the unit-coefficient Newtonian kernel"
            )
        sol = newtonian_radial(cfg.profile, cfg.dim)

        def exact(grid, final, t):
            return (sol.trajectories(grid.positions, t),
                    sol.velocities(grid.positions, t),
                    sol.densities(grid.positions, t))

        return exact

    if (len(terms) == 1 and isinstance(terms[0], PowerLawTerm)
            and terms[0].a == 2.0 and terms[0].coeff > 0):
        coeff = terms[0].coeff

        def exact(grid, final, t):
            mass = float(np.sum(grid.weights))
            rate = coeff * mass
            xbar = grid.weights @ grid.positions / mass
            pos = xbar + math.exp(-rate * t) * (grid.positions - xbar)
            vel = -rate * (pos - xbar)
            rho = grid.rho0 * math.exp(rate * cfg.dim * t)
            return pos, vel, rho

        return exact

    raise ValidationError(
        "no exact oracle for this kernel; use a ('fine_grid', h_ref) reference"
    )


def _fine_grid_reference(cfg: StudyConfig, h_ref: float):
    h_ref = float(h_ref)
    cache = {}

    def exact(grid, final, t):
        if "final" not in cache:
            g = discretize(cfg.profile, h_ref, cfg.dim)
            s0 = ParticleState.from_grid(g)
            m = _make_method(cfg.kernel, cfg.mollifier, h_ref**cfg.q,
                             cfg.method, cfg.table)
            (fin,) = integrate(s0, m, None, t)
            cache["final"] = fin
            cache["vel"] = (velocity(fin, m)
                            if "velocity" in cfg.observables else None)
            cache["lookup"] = {tuple(ix): k for k, ix in enumerate(fin.indices)}
        fin = cache["final"]
        ratio = round(grid.h / h_ref)
        try:
            rows = np.array([cache["lookup"][tuple(ix * ratio)]
                             for ix in grid.indices])
        except KeyError as exc:
            raise IndexMismatchError(
                f"coarse site {exc.args[0]} has no twin on the reference grid"
            ) from None
        vel = cache["vel"][rows] if cache["vel"] is not None else None
        return fin.positions[rows], vel, fin.densities[rows]

    return exact


def _resolve_reference(cfg: StudyConfig):
    ref = cfg.reference
    if callable(ref):
        return ref
    if ref == "exact_oracle":
        return _oracle_reference(cfg)
    return _fine_grid_reference(cfg, ref[1])


def run_study(cfg: StudyConfig,
              integrator: IntegratorConfig | None = None) -> ConvergenceReport:
    """Sweep cfg.h_list and return the error table with fitted rates."""
    reference = _resolve_reference(cfg)
    rows = []
    for h in cfg.h_list:
        grid = discretize(cfg.profile, h, cfg.dim)
        state0 = ParticleState.from_grid(grid)
        method = _make_method(cfg.kernel, cfg.mollifier, h**cfg.q,
                              cfg.method, cfg.table)
        (final,) = integrate(state0, method, integrator, cfg.t_eval)
        epos, evel, erho = reference(grid, final, cfg.t_eval)

        values = {}
        for obs in cfg.observables:
            if obs == "trajectory":
                d = np.asarray(epos) - final.positions
                values[obs] = np.sqrt(np.sum(d * d, axis=1))
            elif obs == "velocity":
                d = np.asarray(evel) - velocity(final, method)
                values[obs] = np.sqrt(np.sum(d * d, axis=1))
            else:
                # keep the sign; the negative-order norm sees cancellation
                values[obs] = np.asarray(erho) - final.densities

        errs = []
        for obs in cfg.observables:
            g = GridFunction(final.h, final.indices, values[obs], final.dim)
            for nm in cfg.norms:
                kind, p = resolve_norm(nm)
                v = lp_norm(g, p, ball=cfg.ball) if kind == "lp" else dual_norm_2(g)
                errs.append((obs, nm, float(v)))
        rows.append(ConvergenceRow(h=float(h), delta=float(h**cfg.q),
                                   errors=tuple(errs)))
    return ConvergenceReport(config=cfg, rows=tuple(rows))


def run_simulation(cfg: SimulationConfig,
                   integrator: IntegratorConfig | None = None) -> list[ParticleState]:
    """Integrate one configuration, returning the sampled states."""
    grid = discretize(cfg.profile, cfg.h, cfg.dim)
    state0 = ParticleState.from_grid(grid)
    method = _make_method(cfg.kernel, cfg.mollifier, cfg.delta_eff,
                          cfg.method, cfg.table)
    return integrate(state0, method, integrator, cfg.t_end, cfg.sample_times())


def simulation_table(states) -> str:
    """Long-format CSV of sampled states: one row per (frame, particle).

    id is the particle's position in the state arrays; integrate never
    reorders particles, so ids are stable across frames.
    """
    first = states[0]
    pos = [f"x{k}" for k in range(first.dim)]
    lines = [",".join(["t", "id", *pos, "rho", "weight"])]
    for st in states:
        for k in range(st.n):
            cells = [repr(float(st.t)), str(k)]
            cells += [repr(float(v)) for v in st.positions[k]]
            cells.append(repr(float(st.densities[k])))
            cells.append(repr(float(st.weights[k])))
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# -- JSON configuration ----------------------------------------------------

def profile_to_config(profile) -> dict:
    """Inverse of profile_from_config; folds nested scalings into one factor."""
    scale = 1.0
    inner = profile
    while isinstance(inner, Scaled):
        scale *= inner.factor
        inner = inner.inner
    if isinstance(inner, PolyBump):
        cfg = {"profile": "poly_bump", "p": inner.p}
    elif isinstance(inner, IndicatorBall):
        cfg = {"profile": "indicator_ball", "radius": inner.radius}
    elif isinstance(inner, IndicatorBox):
        cfg = {"profile": "indicator_box", "halfwidths": list(inner.halfwidths)}
    elif isinstance(inner, SmoothBump):
        cfg = {"profile": "smooth_bump"}
    elif isinstance(inner, StarPatch):
        cfg = {"profile": "star_patch"}
    else:
        raise ValidationError(
            f"cannot serialize profile of type {type(inner).__name__}"
        )
    if scale != 1.0:
        cfg["scale"] = scale
    return cfg


def _table_to_config(table):
    if table is None:
        return None
    return {"r_max": table.r_max, "n_points": table.n_points,
            "quad_tol": table.quad_tol}


def _table_from_config(cfg):
    if cfg is None:
        return None
    return TableConfig(r_max=float(cfg["r_max"]), n_points=int(cfg["n_points"]),
                       quad_tol=float(cfg.get("quad_tol", 1e-9)))


def _reference_to_config(ref):
    if ref == "exact_oracle":
        return "exact_oracle"
    if isinstance(ref, tuple) and len(ref) == 2 and ref[0] == "fine_grid":
        return {"fine_grid": float(ref[1])}
    raise ValidationError("callable references cannot be written to JSON")


def _reference_from_config(cfg):
    if cfg == "exact_oracle":
        return "exact_oracle"
    if isinstance(cfg, dict) and set(cfg) == {"fine_grid"}:
        return ("fine_grid", float(cfg["fine_grid"]))
    raise ValidationError(f"bad reference config {cfg!r}")


def simulation_to_config(cfg: SimulationConfig) -> dict:
    return {
        "mode": "simulate",
        "name": cfg.name,
        "kernel": kernel_to_config(cfg.kernel),
        "mollifier": cfg.mollifier,
        "profile": profile_to_config(cfg.profile),
        "dim": cfg.dim,
        "h": cfg.h,
        "t_end": cfg.t_end,
        "q": cfg.q,
        "delta": cfg.delta,
        "method": cfg.method,
        "table": _table_to_config(cfg.table),
        "n_frames": cfg.n_frames,
    }


def study_to_config(cfg: StudyConfig) -> dict:
    return {
        "mode": "study",
        "name": cfg.name,
        "kernel": kernel_to_config(cfg.kernel),
        "mollifier": cfg.mollifier,
        "profile": profile_to_config(cfg.profile),
        "dim": cfg.dim,
        "h_list": list(cfg.h_list),
        "t_eval": cfg.t_eval,
        "q": cfg.q,
        "method": cfg.method,
        "norms": list(cfg.norms),
        "observables": list(cfg.observables),
        "reference": _reference_to_config(cfg.reference),
        "table": _table_to_config(cfg.table),
        "ball": cfg.ball,
    }


def config_from_dict(cfg: dict):
    """Build a SimulationConfig or StudyConfig from a parsed JSON dict."""
    if not isinstance(cfg, dict):
        raise ValidationError("config must be a JSON object")
    mode = cfg.get("mode", "study" if "h_list" in cfg else "simulate")
    try:
        if mode == "study":
            return StudyConfig(
                name=str(cfg["name"]),
                kernel=kernel_from_config(cfg["kernel"]),
                mollifier=str(cfg["mollifier"]),
                profile=profile_from_config(cfg["profile"]),
                dim=int(cfg["dim"]),
                h_list=tuple(cfg["h_list"]),
                t_eval=float(cfg["t_eval"]),
                q=float(cfg.get("q", 0.9)),
                method=str(cfg.get("method", "blob")),
                norms=tuple(cfg.get("norms", ["l1"])),
                observables=tuple(cfg.get("observables",
                                          ["trajectory", "density"])),
                reference=_reference_from_config(
                    cfg.get("reference", "exact_oracle")),
                table=_table_from_config(cfg.get("table")),
                ball=None if cfg.get("ball") is None else float(cfg["ball"]),
            )
        if mode == "simulate":
            return SimulationConfig(
                name=str(cfg["name"]),
                kernel=kernel_from_config(cfg["kernel"]),
                mollifier=str(cfg["mollifier"]),
                profile=profile_from_config(cfg["profile"]),
                dim=int(cfg["dim"]),
                h=float(cfg["h"]),
                t_end=float(cfg["t_end"]),
                q=float(cfg.get("q", 0.9)),
                delta=None if cfg.get("delta") is None else float(cfg["delta"]),
                method=str(cfg.get("method", "blob")),
                table=_table_from_config(cfg.get("table")),
                n_frames=int(cfg.get("n_frames", 11)),
            )
    except KeyError as exc:
        raise ValidationError(f"config is missing key {exc.args[0]!r}") from None
    raise ValidationError(f"unknown config mode {mode!r}")


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical (sorted, compact) JSON encoding."""
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _versions() -> dict:
    import scipy

    try:
        from importlib.metadata import version
        pkg = version("aggblob")
    except Exception:
        pkg = "unknown"
    return {"aggblob": pkg, "numpy": np.__version__, "scipy": scipy.__version__}


def write_report(report: ConvergenceReport, outdir) -> tuple[Path, Path]:
    """Write {name}_errors.csv and {name}_meta.json under outdir."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{report.config.name}_errors.csv"
    meta_path = out / f"{report.config.name}_meta.json"
    csv_path.write_text(report.to_csv())
    meta_path.write_text(
        json.dumps(report.metadata(), indent=2, sort_keys=True) + "\n")
    return csv_path, meta_path


def write_simulation(cfg: SimulationConfig, states, outdir) -> tuple[Path, Path]:
    """Write {name}_trajectories.csv and {name}_meta.json under outdir."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{cfg.name}_trajectories.csv"
    meta_path = out / f"{cfg.name}_meta.json"
    csv_path.write_text(simulation_table(states))
    conf = simulation_to_config(cfg)
    meta = {"config": conf, "config_sha256": config_hash(conf),
            "versions": _versions()}
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path, meta_path


# -- presets ----------------------------------------------------------------

_SWEEP_1D = (0.08, 0.04, 0.02, 0.01)


def _fig1():
    return StudyConfig(
        name="fig1", kernel=newtonian(1), mollifier="psi4_1d",
        profile=PolyBump(p=20.0), dim=1, h_list=_SWEEP_1D, t_eval=0.5,
        q=0.9, norms=("l1",), reference="exact_oracle")


def _fig3():
    # indicator data steepens into blowup at t* = 1; run slightly past it
    return SimulationConfig(
        name="fig3", kernel=newtonian(1), mollifier="psi4_1d",
        profile=IndicatorBall(radius=1.0), dim=1, h=0.04, t_end=1.05,
        q=0.9, n_frames=22)


def _fig4(kernel_name: str, variant: str):
    name = f"fig4_{kernel_name}_{variant}"
    kernel = newtonian(1) if kernel_name == "newtonian" else power_law(3.0, 1)
    mollifier = "psi6_1d" if variant == "m6" else "psi4_1d"
    method = "particle" if variant == "particle" else "blob"
    table = None
    if kernel_name == "cubic" and method == "blob":
        n = 2_000_000 if variant == "m6" else 500_000
        table = TableConfig(r_max=2.5, n_points=n)
    reference = ("exact_oracle" if kernel_name == "newtonian"
                 else ("fine_grid", 0.0025))
    observables = ("trajectory",) if method == "particle" \
        else ("trajectory", "density")
    return StudyConfig(
        name=name, kernel=kernel, mollifier=mollifier,
        profile=PolyBump(p=10.0), dim=1, h_list=_SWEEP_1D, t_eval=0.5,
        q=0.9, method=method, norms=("l1",), observables=observables,
        reference=reference, table=table)


def _fig5():
    return StudyConfig(
        name="fig5", kernel=newtonian(2), mollifier="psi4_2d",
        profile=PolyBump(p=2.0), dim=2, h_list=(0.13, 0.07), t_eval=0.5,
        q=0.9, norms=("l1",), reference="exact_oracle")


_FIG6_KERNELS = {
    "a": Kernel((PowerLawTerm(a=4.0, coeff=1.0), NewtonianTerm(coeff=-1.0)), 2),
    "b": Kernel((PowerLawTerm(a=4.0, coeff=1.0),
                 PowerLawTerm(a=1.5, coeff=-1.0)), 2),
    "c": Kernel((PowerLawTerm(a=7.0, coeff=1.0),
                 PowerLawTerm(a=1.5, coeff=-1.0)), 2),
}


def _fig6(which: str, delta=None):
    name = "fig6_large_delta" if delta is not None else f"fig6{which}"
    table = None if which == "a" else TableConfig(r_max=2.5, n_points=100)
    return SimulationConfig(
        name=name, kernel=_FIG6_KERNELS[which], mollifier="psi4_2d",
        profile=normalized(PolyBump(p=2.0), 2), dim=2, h=0.11, t_end=8.0,
        q=0.9, delta=delta, table=table, n_frames=41)


_FIG7_KERNELS = {
    # attractive-repulsive exponential pairs; lengths 1 and 2
    "a": morse([(1.0, 1.0, 1.0), (2.0, 2.0, -1.0)], 2),
    "b": morse([(2.0, 1.0, 1.0), (2.0, 2.0, -1.0)], 2),
}


def _fig7(which: str):
    kernel = _FIG7_KERNELS["a" if which == "c" else which]
    profile = StarPatch() if which == "c" else normalized(PolyBump(p=2.0), 2)
    return SimulationConfig(
        name=f"fig7{which}", kernel=kernel, mollifier="psi4_2d",
        profile=profile, dim=2, h=0.11, t_end=4.0, q=0.9,
        table=TableConfig(r_max=5.0, n_points=200), n_frames=41)


_PRESETS = {
    "fig1": _fig1,
    "fig3": _fig3,
    "fig4_newtonian_m4": lambda: _fig4("newtonian", "m4"),
    "fig4_newtonian_m6": lambda: _fig4("newtonian", "m6"),
    "fig4_newtonian_particle": lambda: _fig4("newtonian", "particle"),
    "fig4_cubic_m4": lambda: _fig4("cubic", "m4"),
    "fig4_cubic_m6": lambda: _fig4("cubic", "m6"),
    "fig4_cubic_particle": lambda: _fig4("cubic", "particle"),
    "fig5": _fig5,
    "fig6a": lambda: _fig6("a"),
    "fig6b": lambda: _fig6("b"),
    "fig6c": lambda: _fig6("c"),
    "fig6_large_delta": lambda: _fig6("a", delta=0.32),
    "fig7a": lambda: _fig7("a"),
    "fig7b": lambda: _fig7("b"),
    "fig7c": lambda: _fig7("c"),
}

_ALIASES = {"fig4": "fig4_newtonian_m4", "fig6": "fig6a", "fig7": "fig7a"}


def preset(name: str):
    """Named configuration from the bundled catalog."""
    key = _ALIASES.get(name, name)
    try:
        factory = _PRESETS[key]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {preset_names()}"
        ) from None
    return factory()


def preset_names() -> tuple[str, ...]:
    return tuple(sorted([*_PRESETS, *_ALIASES]))
