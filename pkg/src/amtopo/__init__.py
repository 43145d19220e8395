"""Topology optimization with additive-manufacturing process costs.

Minimizes the compliance of the final design plus a weighted sum of
process costs of the partially built structure (self-weight compliance
or thermal compliance of each build layer) on structured 2D/3D grids,
with a Helmholtz density filter, smoothed threshold projection, adjoint
sensitivities, and an MMA optimizer.
"""

from .cases import build_problem, case_boundary_conditions
from .config import ConfigError, RunConfig, config_echo, load_config, parse_config_text
from .filtering import (FilterOperator, ProjectionSchedule, beta_at,
                        centroid_gather, project)
from .material import MaterialLaw, ramp_conductivity
from .mesh import (LayerPartition, StructuredMesh, SubMesh, build_mesh,
                   extract_submesh, make_layer_partition)
from .metrics import OverhangReport, grayness, npup, npup_sweep, pup
from .mma import MMAParams, MMAState, mma_step
from .optimize import (IterationRecord, OptimizeResult, OptimizerOptions,
                       PupBaselineLimits, run, volume_constraint)
from .process import (CostBreakdown, ProblemSpec, ProcessModel,
                      StateSolution, layer_weights, normalized_gravity)
from .sensitivity import chain_rule, total_sensitivity

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigError", "RunConfig", "config_echo", "load_config",
    "parse_config_text",
    "build_problem", "case_boundary_conditions",
    "FilterOperator", "ProjectionSchedule", "beta_at", "centroid_gather",
    "project",
    "MaterialLaw", "ramp_conductivity",
    "LayerPartition", "StructuredMesh", "SubMesh", "build_mesh",
    "extract_submesh", "make_layer_partition",
    "OverhangReport", "grayness", "npup", "npup_sweep", "pup",
    "MMAParams", "MMAState", "mma_step",
    "IterationRecord", "OptimizeResult", "OptimizerOptions",
    "PupBaselineLimits", "run", "volume_constraint",
    "CostBreakdown", "ProblemSpec", "ProcessModel", "StateSolution",
    "layer_weights", "normalized_gravity",
    "chain_rule", "total_sensitivity",
]
