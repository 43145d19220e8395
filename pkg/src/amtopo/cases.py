"""Built-in benchmark cases: boundary conditions and problem wiring.

Point loads are regularized as tractions over a one-element-wide band
summing to the configured load magnitude, which keeps the compliance
mesh-convergent. The build direction is always the last axis (+y in
2D, +z in 3D); structural supports are case specific and independent
of the build plate used by the sub-problems.
"""

from __future__ import annotations

import numpy as np

from .assembly import traction_load
from .config import RunConfig
from .filtering import FilterOperator, ProjectionSchedule
from .material import MaterialLaw
from .mesh import BoundaryRegion, StructuredMesh, build_mesh
from .mma import MMAParams
from .optimize import OptimizerOptions, PupBaselineLimits
from .process import ProblemSpec, ProcessModel


def _all_dofs(nodes: np.ndarray, dim: int) -> np.ndarray:
    return (nodes[:, None] * dim + np.arange(dim)[None, :]).ravel()


def cantilever2d_bcs(mesh: StructuredMesh, load: float):
    """Left edge clamped; unit downward load at the middle of the right edge."""
    fixed = _all_dofs(mesh.nodes_on_plane(0, 0), 2)
    nx, ny = mesh.elems_per_axis
    elem = (ny // 2) * nx + (nx - 1)
    region = BoundaryRegion("neumann_main", np.array([elem]), "x+")
    traction = (0.0, -load / mesh.face_measure("x+"))
    return fixed, traction_load(mesh, region, traction)


def mbb2d_bcs(mesh: StructuredMesh, load: float):
    """Half model: symmetry on the left edge, roller at the bottom-right
    corner, downward load at the top-left corner."""
    nx, ny = mesh.elems_per_axis
    sym = mesh.nodes_on_plane(0, 0) * 2           # u_x = 0 on x = 0
    corner = mesh.nodes_on_plane(0, nx)           # x = Lx column
    roller = corner[:1] * 2 + 1                   # u_y = 0 at (Lx, 0)
    fixed = np.concatenate([sym, roller])
    elem = (ny - 1) * nx                          # top row, leftmost element
    region = BoundaryRegion("neumann_main", np.array([elem]), "y+")
    traction = (0.0, -load / mesh.face_measure("y+"))
    return fixed, traction_load(mesh, region, traction)


def beam3d_bcs(mesh: StructuredMesh, load: float):
    """x = 0 face clamped; downward load along the bottom edge of the
    free end, spread over the one-element-deep face band there."""
    fixed = _all_dofs(mesh.nodes_on_plane(0, 0), 3)
    nx, ny, nz = mesh.elems_per_axis
    elems = (nx - 1) + nx * np.arange(ny)         # x+ faces with e_z = 0
    region = BoundaryRegion("neumann_main", elems, "x+")
    band_area = ny * mesh.face_measure("x+")
    traction = (0.0, 0.0, -load / band_area)
    return fixed, traction_load(mesh, region, traction)


_CASE_BCS = {
    "cantilever2d": cantilever2d_bcs,
    "mbb2d": mbb2d_bcs,
    "beam3d": beam3d_bcs,
}


def case_boundary_conditions(case: str, mesh: StructuredMesh, load: float):
    try:
        builder = _CASE_BCS[case]
    except KeyError:
        raise ValueError(
            f"case {case!r} has no built-in boundary conditions; "
            f"expected one of {sorted(_CASE_BCS)}"
        ) from None
    return builder(mesh, load)


def problem_spec_from_config(cfg: RunConfig) -> ProblemSpec:
    return ProblemSpec(
        formulation=cfg.formulation,
        l=cfg.l,
        w0=cfg.w0,
        T=cfg.T,
        g=cfg.g,
        q_source=cfg.q_source,
        vbar=cfg.vbar,
        main_law=MaterialLaw("SIMP", E0=cfg.E0, E_min=cfg.E_min,
                             q=cfg.q_main, nu=cfg.nu),
        sub_law=MaterialLaw("RAMP", E0=cfg.E0, E_min=cfg.E_min,
                            q=cfg.q_sub, nu=cfg.nu,
                            kappa_min=cfg.kappa_min),
    )


def build_problem(cfg: RunConfig):
    """Wire a config into (mesh, model, filter, schedule, options)."""
    mesh = build_mesh(cfg.extents, cfg.elems)
    spec = problem_spec_from_config(cfg)
    fixed, load = case_boundary_conditions(cfg.case, mesh, cfg.load)
    # direct factorization everywhere in 2D; in 3D its memory and time
    # are prohibitive, so default to CG (AMG-preconditioned elasticity,
    # Jacobi conduction) at a tolerance well inside the FD test band
    main_solver = cfg.main_solver or ("cg" if mesh.dim == 3 else "direct")
    sub_solver = cfg.sub_solver or ("cg" if mesh.dim == 3 else "direct")
    model = ProcessModel(mesh, spec, fixed, load,
                         main_solver=main_solver, sub_solver=sub_solver,
                         cg_tol=cfg.cg_tol)
    filter_op = FilterOperator(mesh, cfg.r_bar)
    schedule = ProjectionSchedule(
        beta_min=cfg.beta_min, beta_max=cfg.beta_max,
        beta_double_every=cfg.beta_double_every,
        gamma_threshold=cfg.gamma_threshold,
    )
    options = OptimizerOptions(
        max_iterations=cfg.max_iterations,
        tol=cfg.tol,
        mma=MMAParams(move=cfg.move_limit),
        pup_limits=PupBaselineLimits(
            angle_deg=cfg.pup_angle, pup_max=cfg.pup_max,
            grayness_max=cfg.grayness_max,
        ),
        log_every=cfg.log_every,
    )
    return mesh, model, filter_op, schedule, options
