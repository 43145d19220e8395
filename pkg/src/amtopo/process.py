"""Main problem, per-layer sub-problems, and the total process cost.

The total cost is the final-design compliance plus a weighted sum of
partial-build costs, one per layer: self-weight compliance of the
partial structure under its own (density-proportional) weight, or
thermal compliance of the partial structure heated on its top face.
Every sub-problem is clamped (or grounded) on the build plate and is
assembled on its own layer mesh rather than by masking the full mesh.

All compliances are evaluated as the load functional at the solution,
which equals the energy bilinear form there.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import OperatorCache, body_load, surface_flux_load
from .material import MaterialLaw, ramp_conductivity
from .mesh import (LayerPartition, StructuredMesh, SubMesh, extract_submesh,
                   make_layer_partition, restrict_field, restrict_nodal)

FORMULATIONS = ("standard", "self_weight", "thermal", "pup_baseline")


@dataclass(frozen=True)
class ProblemSpec:
    """Formulation choice plus the process and material parameters."""

    formulation: str = "standard"
    l: int = 1
    w0: float = 1.0
    T: float = 1.0
    g: float = 9.81
    q_source: float = 1.0
    vbar: float = 0.5
    main_law: MaterialLaw = field(default_factory=lambda: MaterialLaw("SIMP", q=5.0))
    sub_law: MaterialLaw = field(default_factory=lambda: MaterialLaw("RAMP", q=5.0))

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {self.formulation!r}")
        if not 0.0 < self.w0 <= 1.0:
            raise ValueError("w0 must lie in (0, 1]")
        if self.has_layers and self.l < 1:
            raise ValueError("layer count must be >= 1")

    @property
    def has_layers(self) -> bool:
        return self.formulation in ("self_weight", "thermal")


@dataclass(frozen=True)
class StateSolution:
    """One solved state: displacement or temperature plus its compliance."""

    field: np.ndarray
    compliance: float
    layer_index: int = 0  # 0 marks the main problem


@dataclass(frozen=True)
class CostBreakdown:
    J_D: float
    J_P: np.ndarray
    weights: np.ndarray
    total: float
    grayness: float = float("nan")


def layer_weights(w0: float, l: int, T: float = 1.0) -> np.ndarray:
    """Uniform time-step weights w_i = (T/l)(1-w0)/w0."""
    if not 0.0 < w0 <= 1.0:
        raise ValueError(f"w0 must lie in (0, 1], got {w0}")
    if l < 1:
        raise ValueError("l must be >= 1")
    if T <= 0:
        raise ValueError("T must be positive")
    return np.full(l, (T / l) * (1.0 - w0) / w0)


def normalized_gravity(g: float, vbar: float, domain_volume: float) -> float:
    """g_p = g / (vbar |Omega|), balancing self-weight against the traction."""
    if vbar <= 0 or domain_volume <= 0:
        raise ValueError("vbar and domain volume must be positive")
    return g / (vbar * domain_volume)


def plate_fixed_dofs(mesh_like: StructuredMesh, ncomp: int) -> np.ndarray:
    """Dofs on the build plate (x.b = 0): all components clamped/grounded."""
    nodes = mesh_like.nodes_on_plane(mesh_like.build_axis, 0)
    if ncomp == 1:
        return nodes
    return (nodes[:, None] * ncomp + np.arange(ncomp)[None, :]).ravel()


class ProcessModel:
    """Binds a mesh, a layer partition, BCs, and solver caches.

    main_fixed / main_load describe the final-design problem; the
    sub-problem boundary conditions are always plate clamps.
    """

    def __init__(self, mesh: StructuredMesh, spec: ProblemSpec,
                 main_fixed: np.ndarray, main_load: np.ndarray,
                 main_solver: str = "direct", sub_solver: str = "direct",
                 cg_tol: float = 1e-8):
        self.mesh = mesh
        self.spec = spec
        self.main_load = np.asarray(main_load, dtype=float)
        self.partition: LayerPartition | None = None
        if spec.has_layers:
            self.partition = make_layer_partition(mesh, spec.l)
        self.weights = (layer_weights(spec.w0, spec.l, spec.T)
                        if spec.has_layers else np.zeros(0))
        self.g_p = normalized_gravity(spec.g, spec.vbar, mesh.domain_volume)
        self._main = OperatorCache(
            mesh, "elasticity", np.asarray(main_fixed, dtype=np.int64),
            nu=spec.main_law.nu, solver=main_solver, cg_tol=cg_tol,
        )
        self._sub_solver = sub_solver
        self._cg_tol = cg_tol
        self._submeshes: dict[int, SubMesh] = {}
        self._sub_caches: dict[int, OperatorCache] = {}
        self.last_phase_ms = {"main": 0.0, "sub": 0.0}

    @property
    def solve_count(self) -> int:
        return self._main.solve_count + sum(
            c.solve_count for c in self._sub_caches.values()
        )

    def submesh(self, i: int) -> SubMesh:
        if i not in self._submeshes:
            self._submeshes[i] = extract_submesh(self.mesh, self.partition, i)
        return self._submeshes[i]

    def _sub_cache(self, i: int) -> OperatorCache:
        if i not in self._sub_caches:
            sub = self.submesh(i)
            if self.spec.formulation == "self_weight":
                physics, ncomp = "elasticity", sub.mesh.dim
            else:
                physics, ncomp = "conduction", 1
            fixed = plate_fixed_dofs(sub.mesh, ncomp)
            self._sub_caches[i] = OperatorCache(
                sub.mesh, physics, fixed, nu=self.spec.sub_law.nu,
                solver=self._sub_solver, cg_tol=self._cg_tol,
            )
        return self._sub_caches[i]

    def solve_main(self, rho_bar_elem: np.ndarray) -> StateSolution:
        E, _ = self.spec.main_law.young(rho_bar_elem)
        u = self._main.solve(E, self.main_load)
        return StateSolution(field=u, compliance=float(self.main_load @ u))

    def solve_selfweight_layer(self, rho_bar_elem: np.ndarray, i: int) -> StateSolution:
        sub = self.submesh(i)
        rho_i = restrict_field(rho_bar_elem, sub)
        E, _ = self.spec.sub_law.young(rho_i)
        load = body_load(sub.mesh, rho_i, self.g_p, sub.mesh.build_axis)
        u = self._sub_cache(i).solve(E, load)
        return StateSolution(field=u, compliance=float(load @ u), layer_index=i)

    def solve_thermal_layer(self, rho_bar_elem: np.ndarray,
                            rho_bar_nodal: np.ndarray, i: int) -> StateSolution:
        sub = self.submesh(i)
        rho_i = restrict_field(rho_bar_elem, sub)
        kappa, _ = ramp_conductivity(rho_i, self.spec.sub_law)
        trace = restrict_nodal(rho_bar_nodal, sub)
        load = surface_flux_load(sub.mesh, sub.layer_top(), trace,
                                 self.spec.q_source)
        theta = self._sub_cache(i).solve(kappa, load)
        return StateSolution(field=theta, compliance=float(load @ theta),
                             layer_index=i)

    def solve_layers(self, rho_bar_elem, rho_bar_nodal) -> list:
        if not self.spec.has_layers:
            return []
        if self.spec.formulation == "self_weight":
            return [self.solve_selfweight_layer(rho_bar_elem, i)
                    for i in range(1, self.spec.l + 1)]
        return [self.solve_thermal_layer(rho_bar_elem, rho_bar_nodal, i)
                for i in range(1, self.spec.l + 1)]

    def total_cost(self, rho_bar_elem, rho_bar_nodal=None):
        """Solve everything; returns (CostBreakdown, main state, layer states)."""
        t0 = time.perf_counter()
        main = self.solve_main(rho_bar_elem)
        t1 = time.perf_counter()
        layers = self.solve_layers(rho_bar_elem, rho_bar_nodal)
        t2 = time.perf_counter()
        self.last_phase_ms = {"main": (t1 - t0) * 1e3, "sub": (t2 - t1) * 1e3}
        J_P = np.array([s.compliance for s in layers])
        total = main.compliance + float(self.weights @ J_P)
        cost = CostBreakdown(J_D=main.compliance, J_P=J_P,
                             weights=self.weights.copy(), total=total)
        return cost, main, layers
