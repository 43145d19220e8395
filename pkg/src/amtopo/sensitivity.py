"""Adjoint sensitivities of the total cost.

All three cost terms are self-adjoint compliances, so no linear solves
beyond the state solves are needed: for J = L(u) with a(u,v) = L(v),
dJ = 2 L'(u) - a'(u,u). The main problem has a design-independent load
(the L' term vanishes); the self-weight sub-problems carry the
density-proportional body load; the thermal sub-problems add a surface
term from the density-weighted heat flux on the layer top.

Per-element derivatives pair with the centroid density; the thermal
surface term pairs with the nodal density trace. Both are pushed back
to the design variables through the projection derivative and the
filter adjoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import face_mass_apply, vector_dof_map
from .filtering import FilterOperator, centroid_gather_adjoint
from .material import ramp_conductivity
from .process import ProcessModel, StateSolution
from .mesh import restrict_field


@dataclass(frozen=True)
class SensitivityField:
    """Total-cost derivative w.r.t. the physical and design densities."""

    wrt_rho_bar_elem: np.ndarray
    wrt_rho_bar_nodal: np.ndarray
    wrt_design: np.ndarray = field(default=None)
    term_main: np.ndarray = field(default=None, repr=False)
    term_layers: np.ndarray = field(default=None, repr=False)


def element_energies(mesh_like, KE: np.ndarray, field_values: np.ndarray,
                     ncomp: int) -> np.ndarray:
    """Per-element energy u_e^T KE u_e for a unit-parameter element matrix."""
    if ncomp == 1:
        edof = mesh_like.conn
    else:
        edof = vector_dof_map(mesh_like)
    U = field_values[edof]
    return np.einsum("ij,jk,ik->i", U, KE, U)


def main_sensitivity(model: ProcessModel, rho_bar_elem: np.ndarray,
                     main: StateSolution) -> np.ndarray:
    """d J_D / d rho_bar per element: -E'(rho) times unit strain energy."""
    _, dE = model.spec.main_law.young(rho_bar_elem)
    q = element_energies(model.mesh, model._main.KE, main.field, model.mesh.dim)
    return -dE * q


def selfweight_sensitivity(model: ProcessModel, rho_bar_elem: np.ndarray,
                           state: StateSolution, i: int) -> np.ndarray:
    """d (w_i J_P,i) / d rho_bar per parent element; zero above layer i.

    Two terms: the load derivative 2 L_i'(u_i) (positive-signed,
    design-dependent loading) and the stiffness term -a_i'(u_i, u_i).
    """
    if state.layer_index != i:
        raise ValueError(f"state belongs to layer {state.layer_index}, not {i}")
    sub = model.submesh(i)
    rho_i = restrict_field(rho_bar_elem, sub)
    _, dE = model.spec.sub_law.young(rho_i)
    cache = model._sub_cache(i)
    q = element_energies(sub.mesh, cache.KE, state.field, sub.mesh.dim)
    # dL/drho_e: the element's nodal share of the body load, paired with u
    axis = sub.mesh.build_axis
    u_b = state.field[sub.mesh.conn * sub.mesh.dim + axis].sum(axis=1)
    vol_share = sub.mesh.elem_volume / sub.mesh.nodes_per_elem
    dL = -model.g_p * vol_share * u_b
    w = model.weights[i - 1]
    out = np.zeros(model.mesh.nel)
    out[sub.elem_map] = w * (2.0 * dL - dE * q)
    return out


def thermal_sensitivity(model: ProcessModel, rho_bar_elem: np.ndarray,
                        state: StateSolution, i: int):
    """d (w_i J_P,i) / d rho_bar, split into element and nodal parts.

    Returns (per-element volumetric term, per-node surface term). The
    surface term lives on the rho_bar trace nodes of the layer top and
    uses the same face mass pairing as the load, keeping the discrete
    adjoint exact.
    """
    if state.layer_index != i:
        raise ValueError(f"state belongs to layer {state.layer_index}, not {i}")
    sub = model.submesh(i)
    rho_i = restrict_field(rho_bar_elem, sub)
    _, dk = ramp_conductivity(rho_i, model.spec.sub_law)
    cache = model._sub_cache(i)
    q = element_energies(sub.mesh, cache.KE, state.field, 1)
    w = model.weights[i - 1]
    out_elem = np.zeros(model.mesh.nel)
    out_elem[sub.elem_map] = -w * dk * q
    theta_face = face_mass_apply(sub.mesh, sub.layer_top(), state.field)
    out_nodal = np.zeros(model.mesh.nnode)
    out_nodal[sub.node_map] = 2.0 * w * model.spec.q_source * theta_face
    return out_elem, out_nodal


def total_sensitivity(model: ProcessModel, rho_bar_elem: np.ndarray,
                      main: StateSolution, layers: list) -> SensitivityField:
    """Accumulate main and layer terms in layer order (deterministic)."""
    g_elem = main_sensitivity(model, rho_bar_elem, main)
    term_main = g_elem.copy()
    g_nodal = np.zeros(model.mesh.nnode)
    term_layers = np.zeros(model.mesh.nel)
    for state in layers:
        i = state.layer_index
        if model.spec.formulation == "self_weight":
            gi = selfweight_sensitivity(model, rho_bar_elem, state, i)
            g_elem = g_elem + gi
            term_layers = term_layers + gi
        else:
            gi_e, gi_n = thermal_sensitivity(model, rho_bar_elem, state, i)
            g_elem = g_elem + gi_e
            g_nodal = g_nodal + gi_n
            term_layers = term_layers + gi_e
    return SensitivityField(
        wrt_rho_bar_elem=g_elem,
        wrt_rho_bar_nodal=g_nodal,
        term_main=term_main,
        term_layers=term_layers,
    )


def chain_rule(g_elem: np.ndarray, g_nodal: np.ndarray,
               filter_op: FilterOperator, dproj_nodal: np.ndarray) -> np.ndarray:
    """Pull a (d/d rho_bar) pair back to the design variables.

    rho_bar(nodal) = project(rho_hat) and rho_bar(elem) is its centroid
    gather, so d/d rho_hat = dproj * (G^T g_elem + g_nodal), and the
    filter adjoint maps that to d/d rho per element.
    """
    nodal = centroid_gather_adjoint(filter_op.mesh, g_elem)
    if g_nodal is not None:
        nodal = nodal + g_nodal
    return filter_op.adjoint(dproj_nodal * nodal)
