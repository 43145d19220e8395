"""Command-line front end: run an optimization, sweep overhang angles,
summarize timing logs.

Artifacts land in the configured output directory: iters.csv (appended
as the run progresses, so a crashed run keeps its history), rho_bar.vtk,
npup.csv, and config.echo. The run command exits 0 on convergence and
3 when the iteration cap was hit first.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import exports
from .cases import build_problem
from .config import ConfigError, RunConfig, config_echo, load_config
from .metrics import npup_sweep
from .optimize import OptimizeResult, run

DEFAULT_SWEEP_ANGLES = (30.0, 45.0, 60.0)


@dataclass
class RunArtifacts:
    config: RunConfig
    result: OptimizeResult
    npup_table: list
    out_dir: Path


def run_case(cfg: RunConfig) -> RunArtifacts:
    """Execute one configured optimization and write all artifacts."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.echo").write_text(config_echo(cfg))

    mesh, model, filter_op, schedule, options = build_problem(cfg)

    iters_path = out / "iters.csv"
    with iters_path.open("w") as fh:
        fh.write(exports.iters_header() + "\n")

        def on_iteration(_n, record, _rho):
            fh.write(exports.iters_row(record) + "\n")
            fh.flush()

        result = run(model, filter_op, schedule, options,
                     iteration_callback=on_iteration)

    exports.write_vtk(
        out / "rho_bar.vtk", mesh,
        cell_fields={"rho_bar": result.rho_bar_elem, "rho": result.design},
        point_fields={"rho_bar_nodal": result.rho_bar_nodal,
                      "rho_hat": result.rho_hat},
    )
    table = npup_sweep(result.rho_bar_nodal, mesh, DEFAULT_SWEEP_ANGLES)
    exports.write_npup_csv(out / "npup.csv", table)
    return RunArtifacts(config=cfg, result=result, npup_table=table,
                        out_dir=out)


def _nodal_from_cells(mesh, cell_values: np.ndarray) -> np.ndarray:
    """Adjacent-cell average, used when a file stores only cell data."""
    acc = np.zeros(mesh.nnode)
    cnt = np.zeros(mesh.nnode)
    np.add.at(acc, mesh.conn.ravel(),
              np.repeat(cell_values, mesh.nodes_per_elem))
    np.add.at(cnt, mesh.conn.ravel(), 1.0)
    return acc / cnt


def _cmd_run(args) -> int:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = (s.strip() for s in item.split("=", 1))
        overrides[key] = raw
    if overrides:
        # reuse the config parser's typing rules
        text = Path(args.config).read_text()
        text += "\n" + "\n".join(f"{k} = {v}" for k, v in overrides.items())
        from .config import parse_config_text

        cfg = parse_config_text(text)
    else:
        cfg = load_config(args.config)

    artifacts = run_case(cfg)
    res = artifacts.result
    status = "converged" if res.converged else "iteration cap reached"
    print(f"{status} after {res.iterations} iterations")
    print(f"J_D = {res.J_D:.6g}   total = {res.total:.6g}   "
          f"grayness = {res.grayness:.4%}")
    for row in artifacts.npup_table:
        print(f"NPUP({row.angle_deg:g} deg) = {row.npup:.6g}")
    print(f"artifacts in {artifacts.out_dir}")
    return 0 if res.converged else 3


def _cmd_sweep(args) -> int:
    angles = [float(a) for a in args.angles.split(",") if a.strip()]
    if not angles:
        raise ConfigError("--angles needs at least one angle")
    path = Path(args.density_file)
    mesh, cells, points = exports.read_vtk(path)
    if "rho_bar_nodal" in points:
        nodal = points["rho_bar_nodal"]
    elif "rho_bar" in cells:
        nodal = _nodal_from_cells(mesh, cells["rho_bar"])
    else:
        raise ConfigError(
            f"{path} carries neither 'rho_bar_nodal' point data nor "
            "'rho_bar' cell data"
        )
    table = npup_sweep(nodal, mesh, angles)
    out = Path(args.out) if args.out else path.with_name("npup.csv")
    exports.write_npup_csv(out, table)
    print(f"angle_deg,npup")
    for row in table:
        print(f"{row.angle_deg:.6g},{row.npup:.6g}")
    print(f"wrote {out}")
    return 0


def _cmd_timing(args) -> int:
    reports = []
    for path in args.runlog:
        rows = exports.read_iters_csv(path)
        label = Path(path).resolve().parent.name or Path(path).stem
        reports.append(exports.timing_report(rows, label=label))
    for rep in reports:
        print(rep)
        print()
    if len(reports) > 1:
        print(exports.timing_table(reports))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amtopo",
        description="Topology optimization with additive-manufacturing "
                    "process costs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured optimization")
    p_run.add_argument("config", help="key-value config file")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser(
        "sweep", help="overhang (NPUP) sweep over threshold angles")
    p_sweep.add_argument("density_file", help="rho_bar.vtk from a run")
    p_sweep.add_argument("--angles", default="30,45,60",
                         help="comma-separated angles in degrees")
    p_sweep.add_argument("--out", default=None, help="output CSV path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_tim = sub.add_parser(
        "timing", help="per-iteration phase timing of one or more runs")
    p_tim.add_argument("runlog", nargs="+", help="iters.csv file(s)")
    p_tim.set_defaults(func=_cmd_timing)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
