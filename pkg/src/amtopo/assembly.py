"""Element matrices, sparse assembly, boundary conditions, and solvers.

Elasticity is plane strain in 2D (unit thickness) and standard
isotropic in 3D; conduction is isotropic Fourier. All element matrices
are evaluated once per mesh for unit material parameters and scaled by
a per-element coefficient at assembly time, which is exact on the
uniform grids used here.

Two solver paths are provided: a sparse Cholesky factorization
(CHOLMOD via cvxopt) and preconditioned conjugate gradients. The solve
tolerance, not the solver choice, is the contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
import cvxopt
import cvxopt.cholmod


class SingularSystemError(Exception):
    """The reduced system is not positive definite (missing supports?)."""


class IterativeSolveError(Exception):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


# ---------------------------------------------------------------------------
# element matrices (2x2(x2) Gauss, exact for these elements on rectangles)

def _gauss_shape_data(sizes):
    """Shape gradients and N values at Gauss points of a box element.

    Returns (weights, N, dNdx) with N of shape (ngp, nen) and dNdx of
    shape (ngp, nen, dim); weights include the Jacobian determinant.
    """
    dim = len(sizes)
    nen = 2**dim
    g = 1.0 / np.sqrt(3.0)
    pts_1d = (-g, g)
    # local corner signs, matching the mesh connectivity ordering
    if dim == 2:
        corners = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
    else:
        corners = np.array(
            [[-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
             [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]],
            dtype=float,
        )
    jac = np.asarray(sizes, dtype=float) / 2.0
    detJ = float(np.prod(jac))

    grids = np.meshgrid(*([pts_1d] * dim), indexing="ij")
    xi = np.stack([grid.ravel() for grid in grids], axis=1)
    ngp = xi.shape[0]

    N = np.empty((ngp, nen))
    dNdx = np.empty((ngp, nen, dim))
    for p in range(ngp):
        for a in range(nen):
            s = corners[a]
            terms = 1.0 + s * xi[p]
            N[p, a] = np.prod(terms) / nen
            for k in range(dim):
                others = np.prod(np.delete(terms, k))
                dNdx[p, a, k] = s[k] * others / nen / jac[k]
    weights = np.full(ngp, detJ)
    return weights, N, dNdx


def _elastic_moduli(E, nu, dim):
    if not -1.0 < nu < 0.5:
        raise ValueError(f"Poisson ratio {nu} outside (-1, 0.5)")
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    if dim == 2:
        # plane strain
        D = np.array(
            [[lam + 2 * mu, lam, 0.0],
             [lam, lam + 2 * mu, 0.0],
             [0.0, 0.0, mu]]
        )
    else:
        D = np.zeros((6, 6))
        D[:3, :3] = lam
        D[np.arange(3), np.arange(3)] = lam + 2 * mu
        D[3:, 3:] = np.eye(3) * mu
    return D


def element_stiffness_elasticity(E, nu, sizes) -> np.ndarray:
    """Stiffness of one rectangular/box element (8x8 in 2D, 24x24 in 3D)."""
    if E <= 0:
        raise ValueError(f"Young's modulus must be positive, got {E}")
    dim = len(sizes)
    nen = 2**dim
    nstr = 3 if dim == 2 else 6
    D = _elastic_moduli(E, nu, dim)
    weights, _, dNdx = _gauss_shape_data(sizes)
    KE = np.zeros((nen * dim, nen * dim))
    for p in range(len(weights)):
        B = np.zeros((nstr, nen * dim))
        for a in range(nen):
            dN = dNdx[p, a]
            c = a * dim
            if dim == 2:
                B[0, c] = dN[0]
                B[1, c + 1] = dN[1]
                B[2, c] = dN[1]
                B[2, c + 1] = dN[0]
            else:
                B[0, c] = dN[0]
                B[1, c + 1] = dN[1]
                B[2, c + 2] = dN[2]
                B[3, c] = dN[1]
                B[3, c + 1] = dN[0]
                B[4, c + 1] = dN[2]
                B[4, c + 2] = dN[1]
                B[5, c] = dN[2]
                B[5, c + 2] = dN[0]
        KE += weights[p] * B.T @ D @ B
    return 0.5 * (KE + KE.T)


def element_stiffness_conduction(kappa, sizes) -> np.ndarray:
    """Conduction matrix of one element (4x4 in 2D, 8x8 in 3D)."""
    if kappa <= 0:
        raise ValueError(f"conductivity must be positive, got {kappa}")
    dim = len(sizes)
    nen = 2**dim
    weights, _, dNdx = _gauss_shape_data(sizes)
    KE = np.zeros((nen, nen))
    for p in range(len(weights)):
        KE += weights[p] * kappa * dNdx[p] @ dNdx[p].T
    return 0.5 * (KE + KE.T)


def element_mass(sizes) -> np.ndarray:
    """Consistent mass matrix with unit density (integral of N_a N_b)."""
    dim = len(sizes)
    nen = 2**dim
    weights, N, _ = _gauss_shape_data(sizes)
    ME = np.zeros((nen, nen))
    for p in range(len(weights)):
        ME += weights[p] * np.outer(N[p], N[p])
    return 0.5 * (ME + ME.T)


def face_mass(measure: float, nodes_per_face: int) -> np.ndarray:
    """Consistent mass matrix of a boundary face of given measure."""
    if nodes_per_face == 2:
        return measure / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
    # bilinear quad, corner ordering around the face
    m = np.array(
        [[4.0, 2.0, 1.0, 2.0],
         [2.0, 4.0, 2.0, 1.0],
         [1.0, 2.0, 4.0, 2.0],
         [2.0, 1.0, 2.0, 4.0]]
    )
    return measure / 36.0 * m


@dataclass(frozen=True)
class ElementMatrixCache:
    """Unit-parameter element matrices for one mesh geometry."""

    sizes: tuple
    nu: float
    stiffness: np.ndarray = field(repr=False)
    conduction: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)


def element_cache(mesh_like, nu: float = 0.3) -> ElementMatrixCache:
    sizes = tuple(mesh_like.spacing)
    return ElementMatrixCache(
        sizes=sizes,
        nu=nu,
        stiffness=element_stiffness_elasticity(1.0, nu, sizes),
        conduction=element_stiffness_conduction(1.0, sizes),
        mass=element_mass(sizes),
    )


# ---------------------------------------------------------------------------
# dof maps and global assembly

def vector_dof_map(mesh_like) -> np.ndarray:
    """Interleaved dof ids per element, shape (nel, nen*dim)."""
    dim = mesh_like.dim
    conn = mesh_like.conn
    return (conn[:, :, None] * dim + np.arange(dim)[None, None, :]).reshape(
        conn.shape[0], -1
    )


def assemble(mesh_like, coeff, physics: str, cache: ElementMatrixCache = None):
    """Global symmetric matrix sum_e coeff[e] * (unit element matrix).

    physics is "elasticity", "conduction", or "mass"; the result is a
    scipy CSR matrix over all dofs (no boundary conditions applied).
    """
    coeff = np.asarray(coeff, dtype=float)
    if coeff.shape[0] != mesh_like.nel:
        raise ValueError(
            f"coefficient length {coeff.shape[0]} != element count {mesh_like.nel}"
        )
    if cache is None:
        cache = element_cache(mesh_like)
    if physics == "elasticity":
        KE, edof = cache.stiffness, vector_dof_map(mesh_like)
        n = mesh_like.nnode * mesh_like.dim
    elif physics == "conduction":
        KE, edof = cache.conduction, mesh_like.conn
        n = mesh_like.nnode
    elif physics == "mass":
        KE, edof = cache.mass, mesh_like.conn
        n = mesh_like.nnode
    else:
        raise ValueError(f"unknown physics {physics!r}")
    nen = edof.shape[1]
    rows = np.repeat(edof, nen, axis=1).ravel()
    cols = np.tile(edof, (1, nen)).ravel()
    vals = (coeff[:, None, None] * KE[None, :, :]).ravel()
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def traction_load(mesh_like, region, traction) -> np.ndarray:
    """Consistent nodal loads for a constant traction on boundary faces.

    traction is a vector (N/m in 2D, N/m^2 in 3D); total applied load is
    traction * |region|.
    """
    dim = mesh_like.dim
    traction = np.asarray(traction, dtype=float)
    boundary = set(mesh_like.boundary_elements(region.side).tolist())
    if not set(region.elements.tolist()) <= boundary:
        raise ValueError(f"region contains elements not on boundary side {region.side}")
    faces = mesh_like.face_nodes(region)
    measure = mesh_like.face_measure(region.side)
    nodes_per_face = faces.shape[1]
    rhs = np.zeros(mesh_like.nnode * dim)
    # constant traction on an affine face: equal share per node
    share = measure / nodes_per_face
    for c in range(dim):
        np.add.at(rhs, faces.ravel() * dim + c, traction[c] * share)
    return rhs


def body_load(mesh_like, rho_elem, g_p: float, build_axis: int) -> np.ndarray:
    """Self-weight load f = -g_p rho_bar b as consistent nodal forces."""
    if g_p < 0:
        raise ValueError("g_p must be >= 0")
    dim = mesh_like.dim
    rho_elem = np.asarray(rho_elem, dtype=float)
    vol_share = mesh_like.elem_volume / mesh_like.nodes_per_elem
    rhs = np.zeros(mesh_like.nnode * dim)
    contrib = -g_p * rho_elem * vol_share
    np.add.at(rhs, mesh_like.conn.ravel() * dim + build_axis,
              np.repeat(contrib, mesh_like.nodes_per_elem))
    return rhs


def face_mass_apply(mesh_like, region, nodal_values) -> np.ndarray:
    """Apply the assembled face mass matrix of a boundary region.

    Returns a per-node vector: (sum of face mass matrices) @ values.
    Used both for the density-weighted surface heat load and for its
    transpose in the sensitivity (the operator is symmetric).
    """
    faces = mesh_like.face_nodes(region)
    measure = mesh_like.face_measure(region.side)
    M = face_mass(measure, faces.shape[1])
    vals = np.asarray(nodal_values, dtype=float)[faces]
    out = np.zeros(mesh_like.nnode)
    np.add.at(out, faces.ravel(), (vals @ M.T).ravel())
    return out


def surface_flux_load(mesh_like, region, rho_nodal, q: float) -> np.ndarray:
    """Heat load on layer-top faces weighted by the density trace."""
    return q * face_mass_apply(mesh_like, region, rho_nodal)


# ---------------------------------------------------------------------------
# linear systems and solvers

@dataclass
class LinearSystem:
    """A symmetric system with eliminated Dirichlet dofs.

    fixed dofs carry prescribed values (zero by default); the reduced
    matrix stays symmetric positive definite for well-posed problems.
    """

    matrix: sp.csr_matrix
    rhs: np.ndarray
    fixed: np.ndarray
    values: np.ndarray = None

    def __post_init__(self):
        self.fixed = np.asarray(self.fixed, dtype=np.int64)
        if self.values is None:
            self.values = np.zeros(self.fixed.shape[0])

    def reduce(self):
        n = self.matrix.shape[0]
        free = np.setdiff1d(np.arange(n), self.fixed, assume_unique=False)
        K_ff = self.matrix[free][:, free]
        rhs_f = self.rhs[free]
        if np.any(self.values != 0.0):
            rhs_f = rhs_f - self.matrix[free][:, self.fixed] @ self.values
        return free, K_ff.tocsr(), rhs_f

    def expand(self, free, x_free):
        x = np.zeros(self.matrix.shape[0])
        x[free] = x_free
        x[self.fixed] = self.values
        return x


def _to_cholmod_lower(K_csr):
    K = sp.tril(K_csr, format="coo")
    return cvxopt.spmatrix(
        cvxopt.matrix(K.data),
        cvxopt.matrix(K.row.astype(np.int64)),
        cvxopt.matrix(K.col.astype(np.int64)),
        K.shape,
    )


def cholmod_solve(K_csr, rhs, symbolic=None):
    """Solve an SPD system by sparse Cholesky; returns (x, symbolic)."""
    A = _to_cholmod_lower(K_csr)
    try:
        if symbolic is None:
            symbolic = cvxopt.cholmod.symbolic(A)
        cvxopt.cholmod.numeric(A, symbolic)
        B = cvxopt.matrix(np.asarray(rhs, dtype=float))
        cvxopt.cholmod.solve(symbolic, B)
    except ArithmeticError as exc:
        raise SingularSystemError(
            "sparse Cholesky failed; system is singular or indefinite "
            "(are there enough supports?)"
        ) from exc
    return np.asarray(B).ravel(), symbolic


def solve_direct(system: LinearSystem) -> np.ndarray:
    free, K_ff, rhs_f = system.reduce()
    x_free, _ = cholmod_solve(K_ff, rhs_f)
    return system.expand(free, x_free)


def solve_cg(system: LinearSystem, tol: float = 1e-8, max_iter: int = 10000,
             preconditioner: str = "jacobi", near_nullspace=None) -> np.ndarray:
    """Preconditioned CG on the reduced system.

    preconditioner is "jacobi" (default) or "amg" (smoothed aggregation;
    pass near_nullspace for elasticity rigid-body modes).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    free, K_ff, rhs_f = system.reduce()
    x_free = _cg_reduced(K_ff, rhs_f, tol, max_iter, preconditioner, near_nullspace)
    return system.expand(free, x_free)


def _cg_reduced(K_ff, rhs_f, tol, max_iter, preconditioner, near_nullspace):
    if preconditioner == "jacobi":
        d = K_ff.diagonal()
        if np.any(d <= 0):
            raise SingularSystemError("nonpositive diagonal entry in reduced matrix")
        M = sp.diags(1.0 / d)
    elif preconditioner == "amg":
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(
            K_ff.tocsr(), B=near_nullspace, smooth="jacobi", max_coarse=500
        )
        M = ml.aspreconditioner(cycle="V")
    else:
        raise ValueError(f"unknown preconditioner {preconditioner!r}")
    x, info = spla.cg(K_ff, rhs_f, rtol=tol, atol=0.0, maxiter=max_iter, M=M)
    if info != 0:
        bnorm = np.linalg.norm(rhs_f)
        res = np.linalg.norm(K_ff @ x - rhs_f) / bnorm if bnorm > 0 else 0.0
        raise IterativeSolveError(
            f"CG did not reach rtol={tol} within {max_iter} iterations "
            f"(relative residual {res:.3e})",
            residual=res,
            iterations=max_iter,
        )
    return x


def rigid_body_modes(coords: np.ndarray) -> np.ndarray:
    """Rigid-body near-nullspace for elasticity AMG, shape (ndof, 3 or 6)."""
    n, dim = coords.shape
    if dim == 2:
        B = np.zeros((2 * n, 3))
        B[0::2, 0] = 1.0
        B[1::2, 1] = 1.0
        B[0::2, 2] = -coords[:, 1]
        B[1::2, 2] = coords[:, 0]
    else:
        B = np.zeros((3 * n, 6))
        for c in range(3):
            B[c::3, c] = 1.0
        B[0::3, 3] = -coords[:, 1]
        B[1::3, 3] = coords[:, 0]
        B[1::3, 4] = -coords[:, 2]
        B[2::3, 4] = coords[:, 1]
        B[0::3, 5] = -coords[:, 2]
        B[2::3, 5] = coords[:, 0]
    return B


class OperatorCache:
    """Reusable assembly and solve machinery for one (mesh, BC) pair.

    Precomputes free-dof triplet indices once; per iteration only the
    element coefficients change. The CHOLMOD path reuses the symbolic
    factorization across calls (the sparsity pattern is fixed); the CG
    path rebuilds its preconditioner per solve.
    """

    def __init__(self, mesh_like, physics: str, fixed_dofs, nu: float = 0.3,
                 solver: str = "direct", cg_tol: float = 1e-8,
                 cg_max_iter: int = 20000):
        self.mesh = mesh_like
        self.physics = physics
        self.solver = solver
        self.cg_tol = cg_tol
        self.cg_max_iter = cg_max_iter
        cache = element_cache(mesh_like, nu)
        if physics == "elasticity":
            self.KE = cache.stiffness
            edof = vector_dof_map(mesh_like)
            ndof = mesh_like.nnode * mesh_like.dim
        elif physics == "conduction":
            self.KE = cache.conduction
            edof = mesh_like.conn
            ndof = mesh_like.nnode
        else:
            raise ValueError(f"unknown physics {physics!r}")
        self.ndof = ndof
        fixed = np.asarray(fixed_dofs, dtype=np.int64)
        self.fixed = fixed
        self.free = np.setdiff1d(np.arange(ndof), fixed)
        remap = -np.ones(ndof, dtype=np.int64)
        remap[self.free] = np.arange(self.free.size)
        redof = remap[edof]
        nen = redof.shape[1]
        rows = np.repeat(redof, nen, axis=1).ravel()
        cols = np.tile(redof, (1, nen)).ravel()
        both_free = (rows >= 0) & (cols >= 0)
        if solver == "direct":
            mask = both_free & (rows >= cols)
        else:
            mask = both_free
        self._rows = rows[mask]
        self._cols = cols[mask]
        self._mask = mask
        self._symbolic = None
        self._near_nullspace = None
        if solver == "cg" and physics == "elasticity":
            coords = mesh_like.node_coords()
            self._near_nullspace = rigid_body_modes(coords)[self.free]
        self.solve_count = 0

    def _values(self, coeff):
        coeff = np.asarray(coeff, dtype=float)
        if coeff.shape[0] != self.mesh.nel:
            raise ValueError(
                f"coefficient length {coeff.shape[0]} != element count {self.mesh.nel}"
            )
        return (coeff[:, None, None] * self.KE[None, :, :]).ravel()[self._mask]

    def solve(self, coeff, rhs) -> np.ndarray:
        """Assemble with the given coefficients and solve for full dofs.

        rhs is over all dofs; fixed dofs are homogeneous.
        """
        vals = self._values(coeff)
        nfree = self.free.size
        rhs_f = np.asarray(rhs, dtype=float)[self.free]
        if self.solver == "direct":
            A = cvxopt.spmatrix(
                cvxopt.matrix(vals),
                cvxopt.matrix(self._rows),
                cvxopt.matrix(self._cols),
                (nfree, nfree),
            )
            try:
                if self._symbolic is None:
                    self._symbolic = cvxopt.cholmod.symbolic(A)
                cvxopt.cholmod.numeric(A, self._symbolic)
                B = cvxopt.matrix(rhs_f)
                cvxopt.cholmod.solve(self._symbolic, B)
            except ArithmeticError as exc:
                raise SingularSystemError(
                    "sparse Cholesky failed; system is singular or indefinite "
                    "(are there enough supports?)"
                ) from exc
            x_free = np.asarray(B).ravel()
        else:
            K_ff = sp.coo_matrix(
                (vals, (self._rows, self._cols)), shape=(nfree, nfree)
            ).tocsr()
            x_free = _cg_reduced(
                K_ff, rhs_f, self.cg_tol, self.cg_max_iter,
                "amg" if self._near_nullspace is not None else "jacobi",
                self._near_nullspace,
            )
        self.solve_count += 1
        x = np.zeros(self.ndof)
        x[self.free] = x_free
        return x
