"""
What the process cost measures
==============================

Printing a part layer by layer means every intermediate, partially
built structure must carry itself (self-weight) or shed heat to the
build plate (thermal). The total objective adds one cost term per
partial structure to the usual final compliance:

    total = J_D + sum_i w_i J_P,i      with  w_i = (T/l) (1 - w0) / w0

This demo evaluates both cost families on the same frozen density
field and shows where the numbers come from.
"""

import numpy as np

from amtopo.assembly import traction_load
from amtopo.mesh import BoundaryRegion, build_mesh
from amtopo.process import ProblemSpec, ProcessModel, layer_weights

mesh = build_mesh((2.0, 1.0), (24, 12))

# clamp the left edge, load the right mid-edge downward
nodes = mesh.nodes_on_plane(0, 0)
fixed = (nodes[:, None] * 2 + np.arange(2)).ravel()
elem = mesh.boundary_elements("x+")[6]
region = BoundaryRegion("neumann_main", np.array([elem]), "x+")
load = traction_load(mesh, region, (0.0, -1.0 / mesh.face_measure("x+")))

# a fixed, half-dense design with some vertical structure
rng = np.random.default_rng(7)
rho_elem = np.clip(0.5 + 0.25 * rng.standard_normal(mesh.nel), 0.05, 1.0)
rho_nodal = np.clip(0.5 + 0.25 * rng.standard_normal(mesh.nnode), 0.05, 1.0)

for formulation in ("self_weight", "thermal"):
    spec = ProblemSpec(formulation=formulation, l=4, w0=0.25, vbar=0.5)
    model = ProcessModel(mesh, spec, fixed, load)
    cost, main, layers = model.total_cost(rho_elem, rho_nodal)

    print(f"\n=== {formulation} ===")
    print(f"final-design compliance J_D = {cost.J_D:.4f}")
    print(f"layer weights w_i = {cost.weights[0]:.4f} each "
          f"(T/l * (1-w0)/w0 with w0={spec.w0}, l={spec.l})")
    print("  layer   height    J_P,i")
    for sol, J in zip(layers, cost.J_P):
        h = sol.layer_index * mesh.build_height / spec.l
        print(f"  {sol.layer_index:5d} {h:8.3f} {J:10.4f}")
    print(f"total = J_D + w . J_P = {cost.total:.4f}")

    # later layers contain earlier ones, so their cost can only grow
    assert np.all(np.diff(cost.J_P) > 0)

# The weight formula itself: w0 = 1 recovers pure compliance design,
# smaller w0 leans harder on the process terms.
print("\nw0 ->  per-layer weight (4 layers):")
for w0 in (1.0, 0.5, 0.25, 0.1):
    print(f"{w0:5.2f} -> {layer_weights(w0, 4)[0]:8.4f}")
