import numpy as np
import pytest

import oracles
from amtopo.assembly import assemble
from amtopo.filtering import (FilterOperator, ProjectionSchedule, beta_at,
                              centroid_gather, centroid_gather_adjoint,
                              filter_adjoint, filter_apply, project)
from amtopo.mesh import build_mesh


# ---------------------------------------------------------------------------
# continuation schedule

def test_beta_schedule_doubles_on_boundaries():
    sched = ProjectionSchedule(1.0, 32.0, 100)
    assert beta_at(1, sched) == 1.0
    assert beta_at(100, sched) == 1.0
    assert beta_at(101, sched) == 2.0
    assert beta_at(200, sched) == 2.0
    assert beta_at(201, sched) == 4.0
    assert beta_at(501, sched) == 32.0
    assert beta_at(5000, sched) == 32.0  # capped


def test_beta_schedule_short_period():
    sched = ProjectionSchedule(1.0, 4.0, 50)
    assert [beta_at(i, sched) for i in (1, 50, 51, 101, 151, 400)] == [
        1.0, 1.0, 2.0, 4.0, 4.0, 4.0]


def test_beta_schedule_validation():
    with pytest.raises(ValueError):
        ProjectionSchedule(8.0, 4.0)
    with pytest.raises(ValueError):
        ProjectionSchedule(1.0, 4.0, 0)
    with pytest.raises(ValueError):
        ProjectionSchedule(1.0, 4.0, 100, 1.5)
    with pytest.raises(ValueError):
        beta_at(0, ProjectionSchedule())


# ---------------------------------------------------------------------------
# tanh projection

def test_projection_endpoints_exact():
    for beta in (1.0, 4.0, 32.0):
        rho, _ = project(np.array([0.0, 0.5, 1.0]), beta, gamma=0.5)
        assert rho[0] == pytest.approx(0.0, abs=1e-15)
        assert rho[1] == pytest.approx(0.5, rel=1e-14)
        assert rho[2] == pytest.approx(1.0, rel=1e-14)


def test_projection_monotone_and_sharpens():
    x = np.linspace(0.0, 1.0, 41)
    lo, _ = project(x, 1.0)
    hi, _ = project(x, 32.0)
    assert np.all(np.diff(lo) > 0)
    assert np.all(np.diff(hi) >= 0)
    # larger beta pushes intermediate values toward 0/1
    mid = (x > 0.55) & (x < 0.95)
    assert np.all(hi[mid] >= lo[mid])


def test_projection_derivative_matches_fd():
    # the projection acts componentwise, so the FD is elementwise too
    x = np.linspace(0.05, 0.95, 19)
    h = 1e-6
    for beta in (1.0, 4.0, 16.0):
        _, d = project(x, beta)
        fd = (project(x + h, beta)[0] - project(x - h, beta)[0]) / (2.0 * h)
        assert np.max(np.abs(d - fd)) <= 1e-6 * max(1.0, np.max(np.abs(d)))


def test_projection_rejects_bad_beta():
    with pytest.raises(ValueError):
        project(np.array([0.5]), 0.0)


# ---------------------------------------------------------------------------
# Helmholtz filter

@pytest.fixture(scope="module")
def mesh2d():
    return build_mesh((3.0, 2.0), (12, 8))


def test_filter_preserves_constants(mesh2d):
    op = FilterOperator(mesh2d, r_bar=0.6)
    for c in (0.0, 0.3, 1.0):
        rho_hat = op.apply(np.full(mesh2d.nel, c))
        assert np.max(np.abs(rho_hat - c)) <= 1e-10


def test_filter_preserves_constants_3d():
    mesh = build_mesh((2.0, 1.0, 1.0), (6, 3, 3))
    op = FilterOperator(mesh, r_bar=0.7)
    rho_hat = op.apply(np.full(mesh.nel, 0.4))
    assert np.max(np.abs(rho_hat - 0.4)) <= 1e-10


def test_filter_conserves_weighted_mass(mesh2d):
    # pairing against the constant test function: 1^T M rho_hat = sum V_e rho_e
    op = FilterOperator(mesh2d, r_bar=0.9)
    rng = np.random.default_rng(3)
    rho = rng.uniform(0.3, 0.7, mesh2d.nel)  # interior range, no clamps
    raw = op._solve(op.scatter(rho))
    assert np.array_equal(raw, op.apply(rho))  # confirms clamp inactive
    M = assemble(mesh2d, np.ones(mesh2d.nel), "mass")
    lhs = np.ones(mesh2d.nnode) @ (M @ raw)
    assert lhs == pytest.approx(rho.sum() * mesh2d.elem_volume, rel=1e-12)


def test_filter_smooths_toward_mean(mesh2d):
    op = FilterOperator(mesh2d, r_bar=1.5)
    rho = np.zeros(mesh2d.nel)
    rho[mesh2d.nel // 2] = 1.0
    rho_hat = op.apply(rho)
    assert rho_hat.max() < 0.5  # spike spread out
    assert rho_hat.max() > 0.0


def test_filter_adjoint_is_transpose(mesh2d):
    op = FilterOperator(mesh2d, r_bar=0.8)
    rng = np.random.default_rng(4)
    x = rng.uniform(0.3, 0.7, mesh2d.nel)
    g = rng.standard_normal(mesh2d.nnode)
    raw = op._solve(op.scatter(x))
    assert np.min(raw) >= 0.0 and np.max(raw) <= 1.0  # clamp-free point
    lhs = g @ op.apply(x)
    rhs = op.adjoint(g) @ x
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_filter_adjoint_matches_fd(mesh2d):
    op = FilterOperator(mesh2d, r_bar=0.8)
    rng = np.random.default_rng(5)
    x = rng.uniform(0.35, 0.65, mesh2d.nel)
    g = rng.standard_normal(mesh2d.nnode)
    grad = op.adjoint(g)
    d = rng.standard_normal(mesh2d.nel)
    fd = oracles.directional_derivative(lambda v: g @ op.apply(v), x, d)
    assert grad @ d == pytest.approx(fd, rel=1e-6)


def test_filter_input_validation(mesh2d):
    with pytest.raises(ValueError):
        FilterOperator(mesh2d, r_bar=0.0)
    op = FilterOperator(mesh2d, r_bar=0.5)
    with pytest.raises(ValueError):
        op.apply(np.zeros(mesh2d.nel + 1))
    with pytest.raises(ValueError):
        op.adjoint(np.zeros(mesh2d.nnode - 1))


def test_filter_wrappers_delegate(mesh2d):
    op = FilterOperator(mesh2d, r_bar=0.5)
    rng = np.random.default_rng(6)
    x = rng.uniform(0.0, 1.0, mesh2d.nel)
    g = rng.standard_normal(mesh2d.nnode)
    assert np.array_equal(filter_apply(op, x), op.apply(x))
    assert np.array_equal(filter_adjoint(op, g), op.adjoint(g))


# ---------------------------------------------------------------------------
# centroid gather

def test_centroid_gather_constant_and_linear(mesh2d):
    assert np.allclose(centroid_gather(mesh2d, np.full(mesh2d.nnode, 0.7)), 0.7)
    # linear nodal field gathers to exact centroid values
    coords = mesh2d.node_coords()
    vals = 2.0 * coords[:, 0] + 3.0 * coords[:, 1]
    gathered = centroid_gather(mesh2d, vals)
    hx, hy = mesh2d.spacing
    ex = np.arange(mesh2d.nel) % mesh2d.elems_per_axis[0]
    ey = np.arange(mesh2d.nel) // mesh2d.elems_per_axis[0]
    centroid = 2.0 * (ex + 0.5) * hx + 3.0 * (ey + 0.5) * hy
    assert np.allclose(gathered, centroid, atol=1e-12)


def test_centroid_gather_adjoint_is_transpose(mesh2d):
    rng = np.random.default_rng(7)
    nodal = rng.standard_normal(mesh2d.nnode)
    g_elem = rng.standard_normal(mesh2d.nel)
    lhs = g_elem @ centroid_gather(mesh2d, nodal)
    rhs = centroid_gather_adjoint(mesh2d, g_elem) @ nodal
    assert lhs == pytest.approx(rhs, rel=1e-12)
