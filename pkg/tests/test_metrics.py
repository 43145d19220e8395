import numpy as np
import pytest

import oracles
from amtopo.mesh import build_mesh
from amtopo.metrics import (OverhangReport, centroid_gradients, grayness,
                            grayness_gradient, npup, npup_sweep, pup,
                            pup_gradient)


def _ceiling(mesh, center, width, axis=None):
    """Solid above void: a flat downward-facing interface at `center`."""
    axis = mesh.build_axis if axis is None else axis
    x = mesh.node_coords()[:, axis]
    return 0.5 * (1.0 + np.tanh((x - center) / width))


def _floor(mesh, center, width):
    """Solid below void: an upward-facing top surface."""
    return 1.0 - _ceiling(mesh, center, width)


def test_centroid_gradients_linear_field_exact():
    mesh = build_mesh((2.0, 1.0), (8, 4))
    coords = mesh.node_coords()
    vals = 1.5 * coords[:, 0] - 2.5 * coords[:, 1]
    g = centroid_gradients(mesh, vals)
    assert np.allclose(g[:, 0], 1.5, atol=1e-12)
    assert np.allclose(g[:, 1], -2.5, atol=1e-12)


def test_centroid_gradients_3d():
    mesh = build_mesh((1.0, 1.0, 2.0), (3, 3, 6))
    coords = mesh.node_coords()
    vals = coords @ np.array([0.3, -0.7, 1.1])
    g = centroid_gradients(mesh, vals)
    assert np.allclose(g, np.array([0.3, -0.7, 1.1])[None, :], atol=1e-12)


# ---------------------------------------------------------------------------
# PUP on constructed interfaces

def test_pup_zero_for_uniform_fields():
    mesh = build_mesh((2.0, 1.0), (16, 8))
    for c in (0.0, 0.5, 1.0):
        assert pup(np.full(mesh.nnode, c), mesh, 45.0) == 0.0


def test_pup_horizontal_slab_measures_cross_section():
    # a flat ceiling: integral of d rho/d y across the interface is 1,
    # so PUP approximates the slab cross-section width
    mesh = build_mesh((2.0, 1.0), (40, 20))
    rho = _ceiling(mesh, center=0.5, width=0.08)
    p = pup(rho, mesh, 45.0)
    assert p == pytest.approx(2.0, rel=0.05)
    # and NPUP divides by the plate measure
    assert npup(p, mesh) == pytest.approx(p / 2.0)


def test_pup_3d_slab_measures_area():
    mesh = build_mesh((1.5, 1.0, 1.0), (15, 10, 10))
    rho = _ceiling(mesh, center=0.5, width=0.1)
    assert pup(rho, mesh, 45.0) == pytest.approx(1.5, rel=0.05)


def test_pup_ignores_upward_interfaces():
    # solid below void: b . grad < 0 through the top surface, suppressed
    mesh = build_mesh((2.0, 1.0), (40, 20))
    rho = _floor(mesh, center=0.5, width=0.08)
    assert abs(pup(rho, mesh, 45.0)) <= 1e-6


def test_pup_vertical_wall_suppressed_at_45():
    # vertical interface has b . n = 0 < cos(45 deg): xi strongly negative
    mesh = build_mesh((2.0, 1.0), (40, 20))
    rho = _ceiling(mesh, center=1.0, width=0.08, axis=0)
    flat = _ceiling(mesh, center=0.5, width=0.08)
    assert abs(pup(rho, mesh, 45.0)) < 0.05 * pup(flat, mesh, 45.0)


def test_pup_threshold_angle_ordering():
    # raising the threshold angle admits more of the interface, so the
    # perimeter grows with the angle
    mesh = build_mesh((2.0, 1.0), (40, 20))
    rng = np.random.default_rng(20)
    base = _ceiling(mesh, center=0.6, width=0.15)
    rho = np.clip(base + 0.1 * rng.standard_normal(mesh.nnode), 0.0, 1.0)
    values = [pup(rho, mesh, a) for a in (30.0, 45.0, 60.0)]
    reports = npup_sweep(rho, mesh, (30.0, 45.0, 60.0))
    assert [r.pup for r in reports] == values
    assert all(isinstance(r, OverhangReport) for r in reports)
    assert values[0] <= values[1] <= values[2]


def test_pup_validation():
    mesh = build_mesh((1.0, 1.0), (4, 4))
    rho = np.zeros(mesh.nnode)
    with pytest.raises(ValueError):
        pup(rho, mesh, 0.0)
    with pytest.raises(ValueError):
        pup(rho, mesh, 91.0)
    with pytest.raises(ValueError):
        pup(rho, mesh, 45.0, zeta=0.0)
    with pytest.raises(ValueError):
        npup_sweep(rho, mesh, ())


def test_pup_gradient_matches_fd():
    mesh = build_mesh((2.0, 1.0), (12, 6))
    rng = np.random.default_rng(21)
    rho = np.clip(_ceiling(mesh, 0.5, 0.2)
                  + 0.05 * rng.standard_normal(mesh.nnode), 0.0, 1.0)
    for angle in (30.0, 45.0, 60.0):
        grad = pup_gradient(rho, mesh, angle)
        d = rng.standard_normal(mesh.nnode)
        d /= np.linalg.norm(d)
        fd = oracles.directional_derivative(
            lambda v: pup(v, mesh, angle), rho, d)
        assert grad @ d == pytest.approx(fd, rel=1e-6)


def test_pup_gradient_componentwise_fd():
    # individual entries, with an absolute floor for the near-zero ones
    # (central differences bottom out near 1e-10 at h = 1e-6)
    mesh = build_mesh((1.0, 1.0), (8, 8))
    rho = _ceiling(mesh, 0.5, 0.15)
    grad = pup_gradient(rho, mesh, 45.0)
    scale = np.max(np.abs(grad))
    rng = np.random.default_rng(22)
    for k in rng.choice(mesh.nnode, size=8, replace=False):
        fd = oracles.central_difference(lambda v: pup(v, mesh, 45.0), rho, int(k))
        assert abs(grad[k] - fd) <= max(1e-4 * scale, 1e-8)


# ---------------------------------------------------------------------------
# grayness

def test_grayness_identities():
    assert grayness(np.zeros(10)) == 0.0
    assert grayness(np.ones(10)) == 0.0
    assert grayness(np.full(10, 0.5)) == 1.0
    mixed = np.array([0.0, 1.0, 0.5, 0.5])
    assert grayness(mixed) == pytest.approx(0.5)


def test_grayness_gradient_matches_fd():
    rng = np.random.default_rng(23)
    r = rng.uniform(0.1, 0.9, 30)
    grad = grayness_gradient(r)
    for k in (0, 13, 29):
        fd = oracles.central_difference(grayness, r, k)
        assert grad[k] == pytest.approx(fd, rel=1e-6)
