"""Command line front end.

Subcommands: simulate (one run, CSV snapshots), converge (refinement
study with fitted rates), moments (mollifier moment table), kernel-table
(sampled kernel profiles), preset (catalog access). Exit codes: 0 on
success, 2 on a configuration problem, 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .errors import NumericalError, UnsupportedTermError, ValidationError
from .harness import (SimulationConfig, StudyConfig, _table_from_config,
                      config_from_dict, preset, preset_names, run_simulation,
                      run_study, simulation_to_config, study_to_config,
                      write_report, write_simulation)
from .kernels import kernel_from_config
from .mollifiers import builtin, mollifier_from_config
from .regkernel import build


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _load_config(args):
    if getattr(args, "preset", None):
        return preset(args.preset)
    if not args.config:
        raise ValidationError("provide --config FILE or --preset NAME")
    return config_from_dict(_read_json(args.config))


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    if isinstance(cfg, StudyConfig):
        raise ValidationError(
            f"{cfg.name!r} is a convergence study; use the converge subcommand"
        )
    states = run_simulation(cfg)
    csv_path, meta_path = write_simulation(cfg, states, args.out)
    print(f"{cfg.name}: {len(states)} frames x {states[0].n} particles")
    print(csv_path)
    print(meta_path)
    return 0


def _cmd_converge(args) -> int:
    cfg = _load_config(args)
    if isinstance(cfg, SimulationConfig):
        raise ValidationError(
            f"{cfg.name!r} is a single run; use the simulate subcommand"
        )
    if args.norm:
        cfg = dataclasses.replace(cfg, norms=(args.norm,))
    if args.ball is not None:
        cfg = dataclasses.replace(cfg, ball=args.ball)
    report = run_study(cfg)
    sys.stdout.write(report.to_csv())
    slopes = report.slopes()
    for key in sorted(slopes):
        print(f"# rate {key} = {slopes[key]:.4f}")
    print(f"# predicted m*q = {report.predicted():.4f}")
    if args.out:
        csv_path, meta_path = write_report(report, args.out)
        print(f"# wrote {csv_path}")
        print(f"# wrote {meta_path}")
    return 0


def _cmd_moments(args) -> int:
    name = args.mollifier
    if name.endswith(".json"):
        psi = mollifier_from_config(_read_json(name))
    else:
        psi = builtin(name)
    print("gamma,moment")
    for gamma in range(psi.order + 1):
        print(f"{gamma},{psi.moment(gamma)!r}")
    return 0


def _kernel_columns(kernel, rs):
    e1 = np.zeros(kernel.dim)
    e1[0] = 1.0
    cols = {"K": [kernel.value(r * e1) for r in rs],
            "dK": [float(kernel.gradient(r * e1)[0]) for r in rs]}
    try:
        cols["lapK"] = [kernel.laplacian(r * e1) for r in rs]
    except UnsupportedTermError:
        pass  # distributional Laplacian; only the mollified g(r) exists
    return cols


def _cmd_kernel_table(args) -> int:
    cfg = _read_json(args.config)
    if "kernel" not in cfg:
        raise ValidationError("kernel-table config needs a 'kernel' entry")
    kernel = kernel_from_config(cfg["kernel"])
    r_max = float(cfg.get("r_max", 2.5))
    n = int(cfg.get("n_points", 256))
    if not r_max > 0 or n < 2:
        raise ValidationError("need r_max > 0 and n_points >= 2")
    rs = np.linspace(r_max / n, r_max, n)

    cols = _kernel_columns(kernel, rs)
    if "mollifier" in cfg:
        if "delta" not in cfg:
            raise ValidationError("a mollified table needs 'delta' next to 'mollifier'")
        psi = builtin(str(cfg["mollifier"]))
        reg = build(kernel, psi, float(cfg["delta"]),
                    table=_table_from_config(cfg.get("table")))
        cols["f"] = np.asarray(reg.grad_profile(rs), dtype=float)
        cols["g"] = np.asarray(reg.lap_profile(rs), dtype=float)

    names = list(cols)
    lines = [",".join(["r", *names])]
    for i, r in enumerate(rs):
        lines.append(",".join([repr(float(r)),
                               *(repr(float(cols[c][i])) for c in names)]))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out} ({n} radii)", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_preset(args) -> int:
    if not args.name:
        for name in preset_names():
            print(name)
        return 0
    cfg = preset(args.name)
    if args.emit_config:
        d = (study_to_config(cfg) if isinstance(cfg, StudyConfig)
             else simulation_to_config(cfg))
        print(json.dumps(d, indent=2, sort_keys=True))
        return 0
    kind = "study" if isinstance(cfg, StudyConfig) else "simulation"
    print(f"{cfg.name}: {cfg.dim}D {cfg.method} {kind}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aggblob",
        description="Blob-method simulations and convergence studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate",
                         help="run one configuration and write state snapshots")
    sim.add_argument("--config", help="JSON configuration file")
    sim.add_argument("--preset", help="named preset instead of --config")
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=_cmd_simulate)

    conv = sub.add_parser("converge",
                          help="run a refinement study and fit rates")
    conv.add_argument("--config", help="JSON configuration file")
    conv.add_argument("--preset", help="named preset instead of --config")
    conv.add_argument("--out", help="also write CSV and metadata here")
    conv.add_argument("--norm", choices=("l1", "l2", "linf", "dual2"),
                      help="override the configured error norms")
    conv.add_argument("--ball", type=float, metavar="R",
                      help="restrict norms to |x| <= R")
    conv.set_defaults(func=_cmd_converge)

    mom = sub.add_parser("moments", help="print a mollifier moment table")
    mom.add_argument("--mollifier", required=True,
                     help="builtin name or a JSON mixture file")
    mom.set_defaults(func=_cmd_moments)

    table = sub.add_parser("kernel-table",
                           help="sample kernel profiles on a radial grid")
    table.add_argument("--config", required=True, help="JSON configuration file")
    table.add_argument("--out", help="CSV file (default: stdout)")
    table.set_defaults(func=_cmd_kernel_table)

    pre = sub.add_parser("preset", help="list presets or emit one as JSON")
    pre.add_argument("--name", help="preset to show")
    pre.add_argument("--emit-config", action="store_true",
                     help="print the full JSON configuration")
    pre.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
