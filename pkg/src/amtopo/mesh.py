"""Structured rectangular grids, boundary tagging, and build-layer partitions.

Nodes and elements are numbered lexicographically with the build axis
slowest, so the element rows that make up a build layer occupy a
contiguous index block and every layer restriction is a prefix slice.
Only build directions along the last coordinate axis (+y in 2D, +z in
3D) are supported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# local node numbering: counterclockwise quad, then the z+ copy for hexes
_FACE_EDGES_2D = {
    "y-": (0, 1),
    "x+": (1, 2),
    "y+": (2, 3),
    "x-": (3, 0),
}
_FACE_QUADS_3D = {
    "z-": (0, 1, 2, 3),
    "z+": (4, 5, 6, 7),
    "y-": (0, 1, 5, 4),
    "y+": (3, 2, 6, 7),
    "x-": (0, 3, 7, 4),
    "x+": (1, 2, 6, 5),
}


@dataclass(frozen=True)
class BoundaryRegion:
    """A set of boundary faces, stored as (element, side) pairs.

    kind is one of {"dirichlet_main", "neumann_main", "build_plate",
    "layer_top"}; side names follow the "x-"/"x+"/... convention.
    """

    kind: str
    elements: np.ndarray
    side: str

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class StructuredMesh:
    """Uniform grid of congruent axis-aligned quads or hexes."""

    extents: tuple
    elems_per_axis: tuple
    dim: int
    build_axis: int
    spacing: tuple
    nodes_per_axis: tuple
    nel: int
    nnode: int
    conn: np.ndarray = field(repr=False)

    @property
    def nodes_per_elem(self) -> int:
        return 2**self.dim

    @property
    def elem_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def domain_volume(self) -> float:
        return float(np.prod(self.extents))

    @property
    def build_height(self) -> float:
        return float(self.extents[self.build_axis])

    @property
    def rows_along_build(self) -> int:
        return self.elems_per_axis[self.build_axis]

    @property
    def elems_per_row(self) -> int:
        return self.nel // self.rows_along_build

    @property
    def build_plate_measure(self) -> float:
        """Measure of the bottom cross section (length in 2D, area in 3D)."""
        return self.domain_volume / self.build_height

    def node_coords(self) -> np.ndarray:
        """Node coordinates, shape (nnode, dim), same ordering as ids."""
        axes = [np.arange(n) * h for n, h in zip(self.nodes_per_axis, self.spacing)]
        if self.dim == 2:
            x, y = np.meshgrid(axes[0], axes[1], indexing="xy")
            return np.stack([x.ravel(), y.ravel()], axis=1)
        z, y, x = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    def boundary_elements(self, side: str) -> np.ndarray:
        """Element ids owning boundary faces on the named side of the box."""
        axis = {"x": 0, "y": 1, "z": 2}[side[0]]
        if axis >= self.dim:
            raise ValueError(f"side {side!r} does not exist in {self.dim}D")
        idx = self._elem_grid_indices()
        n = self.elems_per_axis[axis]
        want = 0 if side[1] == "-" else n - 1
        return np.where(idx[axis] == want)[0]

    def boundary_region(self, kind: str, side: str) -> BoundaryRegion:
        return BoundaryRegion(kind, self.boundary_elements(side), side)

    def nodes_on_plane(self, axis: int, index: int) -> np.ndarray:
        """Node ids on the grid plane axis = index (node index units)."""
        grids = self._node_grid_indices()
        return np.where(grids[axis] == index)[0]

    def face_local_nodes(self, side: str) -> tuple:
        if self.dim == 2:
            return _FACE_EDGES_2D[side]
        return _FACE_QUADS_3D[side]

    def face_nodes(self, region: BoundaryRegion) -> np.ndarray:
        """Global node ids per face, shape (nfaces, 2 or 4)."""
        local = list(self.face_local_nodes(region.side))
        return self.conn[region.elements][:, local]

    def face_measure(self, side: str) -> float:
        """Measure of one boundary face on the named side."""
        axis = {"x": 0, "y": 1, "z": 2}[side[0]]
        sizes = [h for k, h in enumerate(self.spacing) if k != axis]
        return float(np.prod(sizes))

    def _elem_grid_indices(self) -> tuple:
        n = self.elems_per_axis
        e = np.arange(self.nel)
        if self.dim == 2:
            return e % n[0], e // n[0]
        return e % n[0], (e // n[0]) % n[1], e // (n[0] * n[1])

    def _node_grid_indices(self) -> tuple:
        n = self.nodes_per_axis
        v = np.arange(self.nnode)
        if self.dim == 2:
            return v % n[0], v // n[0]
        return v % n[0], (v // n[0]) % n[1], v // (n[0] * n[1])


def build_mesh(extents, elems_per_axis, build_axis=None) -> StructuredMesh:
    """Build a uniform structured mesh of quads (2D) or hexes (3D).

    Parameters
    ----------
    extents : sequence of float
        Domain lengths per axis, all positive.
    elems_per_axis : sequence of int
        Element counts per axis, all >= 1.
    build_axis : int, optional
        Axis of the build direction. Defaults to the last axis and only
        the last axis is supported (layer rows must be contiguous).
    """
    extents = tuple(float(v) for v in extents)
    elems_per_axis = tuple(int(v) for v in elems_per_axis)
    dim = len(extents)
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if len(elems_per_axis) != dim:
        raise ValueError("extents and elems_per_axis length mismatch")
    if any(v <= 0 for v in extents):
        raise ValueError(f"extents must be positive, got {extents}")
    if any(n < 1 for n in elems_per_axis):
        raise ValueError(f"element counts must be >= 1, got {elems_per_axis}")
    if build_axis is None:
        build_axis = dim - 1
    if build_axis != dim - 1:
        raise ValueError(
            "build direction must lie along the last axis "
            f"(+{'yz'[dim - 2]} in {dim}D), got axis {build_axis}"
        )

    spacing = tuple(L / n for L, n in zip(extents, elems_per_axis))
    nodes_per_axis = tuple(n + 1 for n in elems_per_axis)
    nel = int(np.prod(elems_per_axis))
    nnode = int(np.prod(nodes_per_axis))

    if dim == 2:
        nx, ny = elems_per_axis
        nnx = nx + 1
        ex, ey = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
        n0 = (ey * nnx + ex).ravel(order="C")
        # meshgrid 'xy' gives shape (ny, nx): raveling keeps y slowest
        conn = np.stack([n0, n0 + 1, n0 + 1 + nnx, n0 + nnx], axis=1)
    else:
        nx, ny, nz = elems_per_axis
        nnx, nny = nx + 1, ny + 1
        ez, ey, ex = np.meshgrid(
            np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij"
        )
        n0 = (ez * nnx * nny + ey * nnx + ex).ravel()
        up = nnx * nny
        conn = np.stack(
            [n0, n0 + 1, n0 + 1 + nnx, n0 + nnx,
             n0 + up, n0 + up + 1, n0 + up + 1 + nnx, n0 + up + nnx],
            axis=1,
        )

    return StructuredMesh(
        extents=extents,
        elems_per_axis=elems_per_axis,
        dim=dim,
        build_axis=build_axis,
        spacing=spacing,
        nodes_per_axis=nodes_per_axis,
        nel=nel,
        nnode=nnode,
        conn=conn,
    )


@dataclass(frozen=True)
class LayerPartition:
    """Uniform decomposition of the element rows into l nested layers.

    Layer i (1-based) covers the lowest i*(rows/l) element rows; its top
    sits at height i*H/l.
    """

    l: int
    rows_per_layer: int
    rows_total: int
    height_total: float

    def top_row(self, i: int) -> int:
        """Exclusive top element-row index of layer i."""
        return i * self.rows_per_layer

    def height(self, i: int) -> float:
        return self.height_total * i / self.l

    def row_ranges(self) -> list:
        return [(0, self.top_row(i)) for i in range(1, self.l + 1)]


def make_layer_partition(mesh: StructuredMesh, l: int) -> LayerPartition:
    """Partition the build rows into l nested layer domains."""
    rows = mesh.rows_along_build
    if l < 1:
        raise ValueError(f"layer count must be >= 1, got {l}")
    if rows % l != 0:
        raise ValueError(
            f"layer count {l} does not divide the {rows} element rows "
            "along the build direction"
        )
    return LayerPartition(
        l=l,
        rows_per_layer=rows // l,
        rows_total=rows,
        height_total=mesh.build_height,
    )


@dataclass(frozen=True)
class SubMesh:
    """The partial domain after depositing layers 1..i.

    Because numbering puts the build axis slowest, both element and node
    maps are prefix ranges of the parent ids and the connectivity is a
    plain slice of the parent table.
    """

    parent: StructuredMesh
    layer_index: int
    mesh: StructuredMesh
    elem_map: np.ndarray = field(repr=False)
    node_map: np.ndarray = field(repr=False)

    @property
    def nel(self) -> int:
        return self.mesh.nel

    @property
    def nnode(self) -> int:
        return self.mesh.nnode

    def build_plate(self) -> BoundaryRegion:
        side = "y-" if self.mesh.dim == 2 else "z-"
        return self.mesh.boundary_region("build_plate", side)

    def layer_top(self) -> BoundaryRegion:
        side = "y+" if self.mesh.dim == 2 else "z+"
        return self.mesh.boundary_region("layer_top", side)


def extract_submesh(mesh: StructuredMesh, partition: LayerPartition, i: int) -> SubMesh:
    """Mesh of layer domain i with parent element and node maps."""
    if not 1 <= i <= partition.l:
        raise ValueError(f"layer index {i} outside 1..{partition.l}")
    rows = partition.top_row(i)
    elems = list(mesh.elems_per_axis)
    elems[mesh.build_axis] = rows
    extents = list(mesh.extents)
    extents[mesh.build_axis] = partition.height(i)
    sub = build_mesh(extents, elems, mesh.build_axis)
    elem_map = np.arange(sub.nel)
    node_map = np.arange(sub.nnode)
    return SubMesh(parent=mesh, layer_index=i, mesh=sub,
                   elem_map=elem_map, node_map=node_map)


def restrict_field(parent_field: np.ndarray, sub: SubMesh) -> np.ndarray:
    """Read-only restriction of a per-element field to a layer domain."""
    parent_field = np.asarray(parent_field)
    if parent_field.shape[0] != sub.parent.nel:
        raise ValueError(
            f"field length {parent_field.shape[0]} != parent element "
            f"count {sub.parent.nel}"
        )
    return parent_field[: sub.nel]


def restrict_nodal(parent_field: np.ndarray, sub: SubMesh) -> np.ndarray:
    """Restriction of a per-node field to a layer domain."""
    parent_field = np.asarray(parent_field)
    if parent_field.shape[0] != sub.parent.nnode:
        raise ValueError(
            f"field length {parent_field.shape[0]} != parent node "
            f"count {sub.parent.nnode}"
        )
    return parent_field[: sub.nnode]
