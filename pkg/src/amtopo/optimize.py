"""Optimization loop: continuation, constraints, MMA updates, logging.

The loop filters and projects the design, evaluates the total process
cost and its adjoint gradient, takes one MMA step per iteration, and
stops once the physical density change drops below tolerance with the
projection sharpness already at beta_max (stopping earlier would abort
the continuation mid-schedule).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .filtering import (FilterOperator, ProjectionSchedule, beta_at,
                        centroid_gather, project)
from .mma import MMAParams, MMAState, mma_step
from .process import ProcessModel
from .sensitivity import chain_rule, total_sensitivity


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    beta: float
    J_D: float
    total: float
    grayness: float
    vol_constraint: float
    step_inf_norm: float
    wall_ms: float
    t_main_ms: float = 0.0
    t_sub_ms: float = 0.0
    t_filter_ms: float = 0.0
    t_mma_ms: float = 0.0
    extra_constraints: tuple = ()


@dataclass(frozen=True)
class PupBaselineLimits:
    """Constraint limits for the perimeter-constrained reference runs."""

    angle_deg: float = 45.0
    pup_max: float = 0.5
    grayness_max: float = 0.6
    zeta: float = 10.0
    beta_delay_start: int = 50
    beta_double_every: int = 25


@dataclass(frozen=True)
class OptimizerOptions:
    max_iterations: int = 2000
    tol: float = 1e-2
    mma: MMAParams = field(default_factory=MMAParams)
    pup_limits: PupBaselineLimits = field(default_factory=PupBaselineLimits)
    log_every: int = 0  # iterations between progress prints; 0 = silent


@dataclass
class OptimizeResult:
    design: np.ndarray
    rho_hat: np.ndarray
    rho_bar_nodal: np.ndarray
    rho_bar_elem: np.ndarray
    J_D: float
    total: float
    grayness: float
    converged: bool
    iterations: int
    log: list


def volume_constraint(rho_bar_elem: np.ndarray, vbar: float):
    """Normalized volume constraint value and its rho_bar gradient.

    value = int(rho_bar) / (vbar |Omega|) - 1, which on a uniform grid
    is mean(rho_bar)/vbar - 1; feasible when <= 0.
    """
    r = np.asarray(rho_bar_elem, dtype=float)
    value = float(r.mean() / vbar - 1.0)
    grad = np.full(r.size, 1.0 / (vbar * r.size))
    return value, grad


def converged(rho_bar_new, rho_bar_old, tol: float) -> bool:
    """Strict infinity-norm test on consecutive physical densities."""
    a = np.asarray(rho_bar_new, dtype=float)
    b = np.asarray(rho_bar_old, dtype=float)
    if a.shape != b.shape:
        raise ValueError("field shapes differ")
    return bool(np.max(np.abs(a - b)) < tol)


def _beta_schedule_value(iteration: int, schedule: ProjectionSchedule,
                         pup_mode: bool, limits: PupBaselineLimits) -> float:
    if not pup_mode:
        return beta_at(iteration, schedule)
    if iteration < limits.beta_delay_start:
        return schedule.beta_min
    doublings = (iteration - limits.beta_delay_start) // limits.beta_double_every + 1
    return float(min(schedule.beta_min * 2.0**doublings, schedule.beta_max))


def run(model: ProcessModel, filter_op: FilterOperator,
        schedule: ProjectionSchedule, options: OptimizerOptions = None,
        initial_design: np.ndarray = None,
        iteration_callback=None) -> OptimizeResult:
    """Run the optimization to convergence or the iteration cap."""
    if options is None:
        options = OptimizerOptions()
    mesh = model.mesh
    spec = model.spec
    pup_mode = spec.formulation == "pup_baseline"
    gamma = schedule.gamma_threshold

    x = (np.full(mesh.nel, spec.vbar) if initial_design is None
         else np.asarray(initial_design, dtype=float).copy())
    if x.shape[0] != mesh.nel:
        raise ValueError("initial design length mismatch")

    state = MMAState.fresh(mesh.nel)
    log: list = []
    rho_bar_prev = None
    rho = dict(hat=None, nodal=None, elem=None)
    gray = float("nan")
    is_converged = False
    n = 0

    if options.max_iterations == 0:
        rho["hat"] = filter_op.apply(x)
        rho["nodal"], _ = project(rho["hat"], schedule.beta_min, gamma)
        rho["elem"] = centroid_gather(mesh, rho["nodal"])
        return OptimizeResult(
            design=x, rho_hat=rho["hat"], rho_bar_nodal=rho["nodal"],
            rho_bar_elem=rho["elem"], J_D=float("nan"), total=float("nan"),
            grayness=metrics.grayness(rho["elem"]), converged=False,
            iterations=0, log=log,
        )

    for n in range(1, options.max_iterations + 1):
        t0 = time.perf_counter()
        beta = _beta_schedule_value(n, schedule, pup_mode, options.pup_limits)
        rho["hat"] = filter_op.apply(x)
        rho["nodal"], dproj = project(rho["hat"], beta, gamma)
        rho["elem"] = centroid_gather(mesh, rho["nodal"])
        t_filter = time.perf_counter() - t0

        cost, main, layers = model.total_cost(rho["elem"], rho["nodal"])
        gray = metrics.grayness(rho["elem"])

        t1 = time.perf_counter()
        sens = total_sensitivity(model, rho["elem"], main, layers)
        dJdx = chain_rule(sens.wrt_rho_bar_elem, sens.wrt_rho_bar_nodal,
                          filter_op, dproj)

        vol_val, vol_grad_elem = volume_constraint(rho["elem"], spec.vbar)
        dVdx = chain_rule(vol_grad_elem, None, filter_op, dproj)
        fvals = [vol_val]
        dfdx = [dVdx]
        extra = ()
        if pup_mode:
            lim = options.pup_limits
            p = metrics.pup(rho["nodal"], mesh, lim.angle_deg, lim.zeta)
            dp_nodal = metrics.pup_gradient(rho["nodal"], mesh,
                                            lim.angle_deg, lim.zeta)
            fvals.append(p - lim.pup_max)
            dfdx.append(chain_rule(np.zeros(mesh.nel), dp_nodal,
                                   filter_op, dproj))
            g_grad = metrics.grayness_gradient(rho["elem"])
            fvals.append(gray - lim.grayness_max)
            dfdx.append(chain_rule(g_grad, None, filter_op, dproj))
            extra = (p, gray)
        t_filter += time.perf_counter() - t1

        step_norm = (float(np.max(np.abs(rho["elem"] - rho_bar_prev)))
                     if rho_bar_prev is not None else float("inf"))
        at_beta_max = beta >= schedule.beta_max
        is_converged = (rho_bar_prev is not None and at_beta_max
                        and converged(rho["elem"], rho_bar_prev, options.tol))

        t2 = time.perf_counter()
        if not is_converged:
            x = mma_step(x, dJdx, np.array(fvals), np.array(dfdx), state,
                         options.mma)
        t_mma = time.perf_counter() - t2

        wall_ms = (time.perf_counter() - t0) * 1e3
        log.append(IterationRecord(
            iteration=n, beta=beta, J_D=cost.J_D, total=cost.total,
            grayness=gray, vol_constraint=vol_val,
            step_inf_norm=step_norm, wall_ms=wall_ms,
            t_main_ms=model.last_phase_ms["main"],
            t_sub_ms=model.last_phase_ms["sub"],
            t_filter_ms=t_filter * 1e3, t_mma_ms=t_mma * 1e3,
            extra_constraints=extra,
        ))
        if options.log_every and n % options.log_every == 0:
            print(f"it {n:5d}  beta {beta:5.1f}  J_D {cost.J_D:10.4f}  "
                  f"total {cost.total:10.4f}  gray {gray:.4f}  "
                  f"step {step_norm:.4f}", flush=True)
        if iteration_callback is not None:
            iteration_callback(n, log[-1], rho)

        if is_converged:
            break
        rho_bar_prev = rho["elem"]

    return OptimizeResult(
        design=x,
        rho_hat=rho["hat"],
        rho_bar_nodal=rho["nodal"],
        rho_bar_elem=rho["elem"],
        J_D=cost.J_D,
        total=cost.total,
        grayness=gray,
        converged=is_converged,
        iterations=n,
        log=log,
    )
