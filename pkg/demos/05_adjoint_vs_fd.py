"""
Checking the adjoint gradient against finite differences
========================================================

The optimizer consumes gradients of the total process cost with
respect to the raw design variables, assembled by the adjoint method
and pulled through the projection and filter by the chain rule. Here
we recompute a handful of entries by central differences on the full
pipeline. Agreement to several digits is what makes the optimization
trustworthy.
"""

import numpy as np

from amtopo.cases import build_problem
from amtopo.config import parse_config_text
from amtopo.filtering import centroid_gather, project
from amtopo.sensitivity import chain_rule, total_sensitivity

for formulation in ("self_weight", "thermal"):
    cfg = parse_config_text(f"""
    case = cantilever2d
    formulation = {formulation}
    l = 4
    w0 = 0.25
    Lx = 2.0
    Ly = 1.0
    nx = 16
    ny = 8
    r_bar = 0.3
    """)
    mesh, model, filter_op, schedule, options = build_problem(cfg)

    # stay away from the filter's [0,1] clamp so the comparison is clean
    rng = np.random.default_rng(1)
    x = rng.uniform(0.35, 0.65, mesh.nel)
    beta = 2.0

    def total(design):
        nodal, _ = project(filter_op.apply(design), beta)
        cost, _, _ = model.total_cost(centroid_gather(mesh, nodal), nodal)
        return cost.total

    nodal, dproj = project(filter_op.apply(x), beta)
    elem = centroid_gather(mesh, nodal)
    cost, main, layers = model.total_cost(elem, nodal)
    sens = total_sensitivity(model, elem, main, layers)
    grad = chain_rule(sens.wrt_rho_bar_elem, sens.wrt_rho_bar_nodal,
                      filter_op, dproj)

    print(f"\n=== {formulation}: total = {cost.total:.6f} ===")
    print(" element      adjoint           FD        rel err")
    h = 1e-6
    for k in rng.choice(mesh.nel, 6, replace=False):
        e = np.zeros(mesh.nel)
        e[k] = h
        fd = (total(x + e) - total(x - e)) / (2 * h)
        rel = abs(grad[k] - fd) / max(abs(fd), 1e-12)
        print(f"{k:8d} {grad[k]:13.6e} {fd:13.6e} {rel:10.2e}")
