import numpy as np
import pytest

from amtopo.mesh import (build_mesh, extract_submesh, make_layer_partition,
                         restrict_field, restrict_nodal)


def test_counts_and_spacing_2d():
    mesh = build_mesh((12.0, 6.0), (240, 120))
    assert mesh.nel == 28800
    assert mesh.nnode == 241 * 121
    assert mesh.spacing == (0.05, 0.05)
    assert mesh.elem_volume == pytest.approx(0.0025)
    assert mesh.domain_volume == pytest.approx(72.0)
    assert mesh.build_plate_measure == pytest.approx(12.0)
    assert mesh.rows_along_build == 120
    assert mesh.elems_per_row == 240


def test_counts_3d():
    mesh = build_mesh((12.0, 6.0, 6.0), (60, 30, 30))
    assert mesh.nel == 54000
    assert mesh.nnode == 61 * 31 * 31
    assert mesh.build_axis == 2
    assert mesh.build_plate_measure == pytest.approx(72.0)


def test_node_ordering_lexicographic():
    mesh = build_mesh((2.0, 1.0), (4, 2))
    xy = mesh.node_coords()
    # x fastest, build axis (y) slowest
    assert np.allclose(xy[0], [0.0, 0.0])
    assert np.allclose(xy[1], [0.5, 0.0])
    assert np.allclose(xy[5], [0.0, 0.5])


def test_connectivity_counterclockwise():
    mesh = build_mesh((2.0, 1.0), (4, 2))
    xy = mesh.node_coords()
    for e in range(mesh.nel):
        quad = xy[mesh.conn[e]]
        # shoelace area positive and equal to the element area
        x, y = quad[:, 0], quad[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        assert area == pytest.approx(mesh.elem_volume)


def test_connectivity_3d_offsets():
    mesh = build_mesh((2.0, 2.0, 2.0), (2, 2, 2))
    xyz = mesh.node_coords()
    conn = mesh.conn
    for e in range(mesh.nel):
        base = xyz[conn[e, 0]]
        assert np.allclose(xyz[conn[e, 1]] - base, [1, 0, 0])
        assert np.allclose(xyz[conn[e, 3]] - base, [0, 1, 0])
        assert np.allclose(xyz[conn[e, 4]] - base, [0, 0, 1])


def test_element_rows_contiguous_along_build():
    mesh = build_mesh((3.0, 2.0), (6, 4))
    # elements of build row k occupy indices [k*6, (k+1)*6)
    idx = mesh._elem_grid_indices()
    for k in range(4):
        rows = np.where(idx[1] == k)[0]
        assert rows[0] == k * 6 and rows[-1] == (k + 1) * 6 - 1


@pytest.mark.parametrize("side,count", [("x-", 4), ("x+", 4), ("y-", 6), ("y+", 6)])
def test_boundary_elements_2d(side, count):
    mesh = build_mesh((3.0, 2.0), (6, 4))
    assert len(mesh.boundary_elements(side)) == count


def test_boundary_face_nodes_on_the_boundary():
    mesh = build_mesh((3.0, 2.0, 1.0), (3, 2, 2))
    xyz = mesh.node_coords()
    for side, axis, value in [("x-", 0, 0.0), ("x+", 0, 3.0),
                              ("y-", 1, 0.0), ("y+", 1, 2.0),
                              ("z-", 2, 0.0), ("z+", 2, 1.0)]:
        region = mesh.boundary_region("neumann_main", side)
        nodes = mesh.face_nodes(region)
        assert np.allclose(xyz[nodes][:, :, axis], value)


def test_face_nodes_cyclic_3d():
    # consecutive corners of every face quad must share a mesh edge
    mesh = build_mesh((2.0, 2.0, 2.0), (2, 2, 2))
    xyz = mesh.node_coords()
    for side in ("x-", "x+", "y-", "y+", "z-", "z+"):
        faces = mesh.face_nodes(mesh.boundary_region("neumann_main", side))
        for quad in faces:
            pts = xyz[quad]
            for a in range(4):
                d = np.abs(pts[(a + 1) % 4] - pts[a])
                assert np.count_nonzero(d) == 1


def test_face_measure():
    mesh = build_mesh((3.0, 2.0, 1.0), (3, 4, 2))
    assert mesh.face_measure("x+") == pytest.approx(0.5 * 0.5)
    assert mesh.face_measure("z-") == pytest.approx(1.0 * 0.5)


def test_build_axis_restriction():
    with pytest.raises(ValueError, match="last axis"):
        build_mesh((1.0, 1.0), (2, 2), build_axis=0)


def test_invalid_geometry():
    with pytest.raises(ValueError):
        build_mesh((0.0, 1.0), (2, 2))
    with pytest.raises(ValueError):
        build_mesh((1.0, 1.0), (0, 2))
    with pytest.raises(ValueError):
        build_mesh((1.0,), (2,))


def test_layer_partition_arithmetic():
    mesh = build_mesh((12.0, 6.0), (24, 12))
    part = make_layer_partition(mesh, 4)
    assert part.rows_per_layer == 3
    assert part.top_row(1) == 3 and part.top_row(4) == 12
    assert part.height(2) == pytest.approx(3.0)
    assert part.row_ranges() == [(0, 3), (0, 6), (0, 9), (0, 12)]


def test_layer_partition_divisibility_error():
    mesh = build_mesh((12.0, 6.0), (24, 12))
    with pytest.raises(ValueError, match="5.*12"):
        make_layer_partition(mesh, 5)


def test_submesh_is_prefix():
    mesh = build_mesh((12.0, 6.0), (24, 12))
    part = make_layer_partition(mesh, 4)
    sub = extract_submesh(mesh, part, 2)
    assert sub.nel == 24 * 6
    assert sub.mesh.extents[1] == pytest.approx(3.0)
    # connectivity is literally the prefix of the parent table
    assert np.array_equal(sub.mesh.conn, mesh.conn[: sub.nel])
    assert np.array_equal(sub.elem_map, np.arange(sub.nel))


def test_submesh_regions():
    mesh = build_mesh((12.0, 6.0, 6.0), (12, 6, 6))
    part = make_layer_partition(mesh, 3)
    sub = extract_submesh(mesh, part, 1)
    plate = sub.build_plate()
    top = sub.layer_top()
    assert plate.side == "z-" and top.side == "z+"
    assert len(plate) == 12 * 6 and len(top) == 12 * 6
    xyz = sub.mesh.node_coords()
    assert np.allclose(xyz[sub.mesh.face_nodes(top)][:, :, 2], 2.0)


def test_restrict_field_checks_length():
    mesh = build_mesh((12.0, 6.0), (24, 12))
    part = make_layer_partition(mesh, 4)
    sub = extract_submesh(mesh, part, 1)
    full = np.arange(mesh.nel, dtype=float)
    assert np.array_equal(restrict_field(full, sub), full[: sub.nel])
    nod = np.arange(mesh.nnode, dtype=float)
    assert np.array_equal(restrict_nodal(nod, sub), nod[: sub.nnode])
    with pytest.raises(ValueError):
        restrict_field(full[:-1], sub)
    with pytest.raises(ValueError):
        restrict_nodal(nod[:-1], sub)


def test_layer_index_bounds():
    mesh = build_mesh((12.0, 6.0), (24, 12))
    part = make_layer_partition(mesh, 4)
    with pytest.raises(ValueError):
        extract_submesh(mesh, part, 0)
    with pytest.raises(ValueError):
        extract_submesh(mesh, part, 5)
