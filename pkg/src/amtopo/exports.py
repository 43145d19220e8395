"""Plot-ready artifact writers and readers: VTK, CSV, timing reports.

All text formats are locale-independent ('.' decimal separator) and
ASCII, so artifacts diff cleanly. Density values are written with
shortest round-trip precision; reloading a snapshot reproduces the
stored field bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mesh import StructuredMesh, build_mesh

ITERS_COLUMNS = ("iter", "beta", "J_D", "total", "grayness",
                 "vol_constraint", "step_inf_norm", "wall_ms",
                 "t_main_ms", "t_sub_ms", "t_filter_ms", "t_mma_ms")


# ---------------------------------------------------------------------------
# VTK (legacy ASCII)

def write_vtk(path, mesh: StructuredMesh, cell_fields: dict,
              point_fields: dict = None, title: str = "density field") -> None:
    """Legacy-VTK structured-points file with named cell/point scalars."""
    dims = list(mesh.nodes_per_axis) + [1] * (3 - mesh.dim)
    spacing = list(mesh.spacing) + [1.0] * (3 - mesh.dim)
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS {} {} {}".format(*dims),
        "ORIGIN 0.0 0.0 0.0",
        "SPACING {} {} {}".format(*(repr(float(h)) for h in spacing)),
    ]

    def emit(block: str, count: int, fields: dict):
        lines.append(f"{block} {count}")
        for name, values in fields.items():
            values = np.asarray(values, dtype=float)
            if values.shape[0] != count:
                raise ValueError(
                    f"field {name!r} has {values.shape[0]} values, "
                    f"expected {count}"
                )
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(repr(float(v)) for v in values)

    if cell_fields:
        emit("CELL_DATA", mesh.nel, cell_fields)
    if point_fields:
        emit("POINT_DATA", mesh.nnode, point_fields)
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk(path):
    """Read back a structured-points file written by write_vtk.

    Returns (mesh, cell_fields, point_fields).
    """
    tokens_dims = None
    spacing = None
    lines = Path(path).read_text().splitlines()
    cell_fields: dict = {}
    point_fields: dict = {}
    target = None
    count = 0
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        i += 1
        if not parts:
            continue
        key = parts[0].upper()
        if key == "DIMENSIONS":
            tokens_dims = [int(p) for p in parts[1:4]]
        elif key == "SPACING":
            spacing = [float(p) for p in parts[1:4]]
        elif key == "CELL_DATA":
            target, count = cell_fields, int(parts[1])
        elif key == "POINT_DATA":
            target, count = point_fields, int(parts[1])
        elif key == "SCALARS":
            if target is None:
                raise ValueError(f"{path}: SCALARS outside a data block")
            name = parts[1]
            if i < len(lines) and lines[i].upper().startswith("LOOKUP_TABLE"):
                i += 1
            values: list = []
            while len(values) < count:
                values.extend(float(v) for v in lines[i].split())
                i += 1
            target[name] = np.array(values)
    if tokens_dims is None or spacing is None:
        raise ValueError(f"{path}: missing DIMENSIONS or SPACING header")
    dims = [d for d in tokens_dims if d > 1]
    elems = [d - 1 for d in dims]
    extents = [n * h for n, h in zip(elems, spacing)]
    return build_mesh(extents, elems), cell_fields, point_fields


# ---------------------------------------------------------------------------
# CSV

def write_density_csv(path, values) -> None:
    """Raw per-element CSV; round trips bytewise through read+write."""
    rows = ["element,rho_bar"]
    rows.extend(f"{e},{repr(float(v))}" for e, v in enumerate(np.asarray(values)))
    Path(path).write_text("\n".join(rows) + "\n")


def read_density_csv(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "element,rho_bar":
        raise ValueError(f"{path}: expected header 'element,rho_bar'")
    return np.array([float(line.split(",")[1]) for line in lines[1:] if line])


def iters_header() -> str:
    return ",".join(ITERS_COLUMNS)


def iters_row(record) -> str:
    vals = [record.iteration, record.beta, record.J_D, record.total,
            record.grayness, record.vol_constraint, record.step_inf_norm,
            record.wall_ms, record.t_main_ms, record.t_sub_ms,
            record.t_filter_ms, record.t_mma_ms]
    out = [str(vals[0])]
    out.extend(repr(float(v)) for v in vals[1:])
    return ",".join(out)


def write_iters_csv(path, log) -> None:
    lines = [iters_header()]
    lines.extend(iters_row(rec) for rec in log)
    Path(path).write_text("\n".join(lines) + "\n")


def read_iters_csv(path) -> list:
    """Iteration rows as dicts keyed by column name; missing columns -> 0."""
    lines = [line for line in Path(path).read_text().splitlines() if line]
    if not lines:
        raise ValueError(f"{path}: empty iteration log")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        row = {col: 0.0 for col in ITERS_COLUMNS}
        row.update({col: float(v) for col, v in zip(header, parts)})
        rows.append(row)
    return rows


def write_npup_csv(path, reports) -> None:
    """Overhang sweep table, 6 significant digits per value."""
    lines = ["angle_deg,npup"]
    lines.extend(f"{r.angle_deg:.6g},{r.npup:.6g}" for r in reports)
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# timing

@dataclass(frozen=True)
class TimingReport:
    """Per-iteration average times (ms) split by phase."""

    label: str
    iterations: int
    wall_ms: float
    main_ms: float
    sub_ms: float
    filter_ms: float
    mma_ms: float

    def lines(self) -> list:
        return [
            f"timing [{self.label}]: {self.iterations} iterations",
            f"  wall        {self.wall_ms:12.3f} ms/it",
            f"  main solve  {self.main_ms:12.3f} ms/it",
            f"  sub-solves  {self.sub_ms:12.3f} ms/it",
            f"  filter      {self.filter_ms:12.3f} ms/it",
            f"  MMA         {self.mma_ms:12.3f} ms/it",
        ]

    def __str__(self) -> str:
        return "\n".join(self.lines())


def _column(rows, attr: str) -> float:
    vals = [getattr(r, attr, None) if not isinstance(r, dict) else r.get(attr)
            for r in rows]
    vals = [0.0 if v is None else float(v) for v in vals]
    return float(np.mean(vals)) if vals else 0.0


def timing_report(log, label: str = "run") -> TimingReport:
    """Average per-iteration phase times of a run log.

    Accepts IterationRecord lists or read_iters_csv row dicts; phases a
    run never exercised average to 0.
    """
    if not log:
        raise ValueError("timing report needs at least one iteration")
    return TimingReport(
        label=label,
        iterations=len(log),
        wall_ms=_column(log, "wall_ms"),
        main_ms=_column(log, "t_main_ms"),
        sub_ms=_column(log, "t_sub_ms"),
        filter_ms=_column(log, "t_filter_ms"),
        mma_ms=_column(log, "t_mma_ms"),
    )


def timing_table(reports) -> str:
    """Side-by-side phase comparison of several timing reports."""
    phases = (("main solve", "main_ms"), ("sub-solves", "sub_ms"),
              ("filter", "filter_ms"), ("MMA", "mma_ms"),
              ("wall", "wall_ms"))
    width = max(12, *(len(r.label) for r in reports)) + 2
    head = "phase [ms/it]".ljust(14) + "".join(r.label.rjust(width) for r in reports)
    lines = [head]
    for name, attr in phases:
        row = name.ljust(14)
        row += "".join(f"{getattr(r, attr):{width}.3f}" for r in reports)
        lines.append(row)
    return "\n".join(lines)
