"""Piecewise-linear finite elements on intervals and the unit square.

Meshes carry homogeneous Dirichlet conditions by elimination: assembled
matrices and load vectors live on the interior unknowns only.  The 2D mesh
is the structured triangulation of the unit square obtained by cutting each
cell of an Ms x Ms grid along the same diagonal, giving 2*Ms**2 right
triangles.  The discrete Laplacian is never formed; inner products against
it are taken through the stiffness matrix.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class SpatialMesh:
    """Conforming P1 mesh with Dirichlet boundary flags.

    Attributes
    ----------
    dimension : int
        1 or 2.
    vertices : ndarray
        Node coordinates, shape (n_nodes,) in 1D or (n_nodes, 2) in 2D.
    elements : ndarray of int
        Connectivity, shape (n_elements, 2) or (n_elements, 3); 2D
        triangles are positively oriented.
    boundary : ndarray of bool
        True on Dirichlet nodes.
    interior_nodes : ndarray of int
        Global indices of the unknowns, in ascending order.
    num_interior : int
        Number of unknowns.
    h : float
        Largest element diameter.
    domain : tuple
        Descriptor, ("interval", a, b) or ("unit_square",).
    subdivisions : int
        Ms, the per-direction element count.
    """

    def __init__(self, dimension, vertices, elements, boundary, domain, subdivisions):
        self.dimension = int(dimension)
        self.vertices = vertices
        self.elements = elements
        self.boundary = boundary
        self.interior_nodes = np.flatnonzero(~boundary)
        self.num_interior = int(self.interior_nodes.size)
        self.domain = domain
        self.subdivisions = int(subdivisions)
        if dimension == 1:
            self.h = float(np.max(np.diff(vertices)))
        else:
            p = vertices[elements]
            e01 = p[:, 1] - p[:, 0]
            e12 = p[:, 2] - p[:, 1]
            e20 = p[:, 0] - p[:, 2]
            lengths = [np.hypot(e[:, 0], e[:, 1]) for e in (e01, e12, e20)]
            self.h = float(max(l.max() for l in lengths))
        for arr in (vertices, elements, boundary, self.interior_nodes):
            arr.flags.writeable = False
        self._mass = {}
        self._stiffness = {}


def build_mesh_1d(a, b, subdivisions):
    """Uniform interval mesh on (a, b) with Ms elements, Ms >= 2."""
    if not b > a:
        raise ValueError(f"interval ({a}, {b}) is empty")
    ms = int(subdivisions)
    if ms < 2:
        raise ValueError(f"need at least 2 elements, got {subdivisions}")
    x = np.linspace(a, b, ms + 1)
    elements = np.column_stack([np.arange(ms), np.arange(1, ms + 1)])
    boundary = np.zeros(ms + 1, dtype=bool)
    boundary[0] = boundary[-1] = True
    return SpatialMesh(1, x, elements, boundary, ("interval", float(a), float(b)), ms)


def build_mesh_2d_unit_square(subdivisions):
    """Structured triangulation of (0, 1)^2, all diagonals in one direction."""
    ms = int(subdivisions)
    if ms < 2:
        raise ValueError(f"need at least 2 elements per direction, got {subdivisions}")
    side = np.linspace(0.0, 1.0, ms + 1)
    xg, yg = np.meshgrid(side, side, indexing="xy")
    vertices = np.column_stack([xg.ravel(), yg.ravel()])

    def g(i, j):
        return j * (ms + 1) + i

    tris = []
    for j in range(ms):
        for i in range(ms):
            v00, v10 = g(i, j), g(i + 1, j)
            v01, v11 = g(i, j + 1), g(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    elements = np.asarray(tris, dtype=np.int64)
    boundary = np.zeros((ms + 1) ** 2, dtype=bool)
    idx = np.arange((ms + 1) ** 2)
    i_coord = idx % (ms + 1)
    j_coord = idx // (ms + 1)
    boundary[(i_coord == 0) | (i_coord == ms) | (j_coord == 0) | (j_coord == ms)] = True
    return SpatialMesh(2, vertices, elements, boundary, ("unit_square",), ms)


def build_spatial_mesh(domain, subdivisions):
    """Build a mesh from a domain descriptor tuple."""
    if domain[0] == "interval":
        return build_mesh_1d(domain[1], domain[2], subdivisions)
    if domain[0] == "unit_square":
        return build_mesh_2d_unit_square(subdivisions)
    raise ValueError(f"unknown domain descriptor {domain!r}")


def _triangle_geometry(mesh):
    """Per-triangle gradients and areas.

    Returns (b, c, area) where the P1 basis gradients on element e are
    (b[e, s], c[e, s]) / (2 * area[e]).
    """
    p = mesh.vertices[mesh.elements]
    x = p[:, :, 0]
    y = p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (
        y[:, 1] - y[:, 0]
    )
    return b, c, 0.5 * det


def _assemble_matrix(mesh, which):
    n_nodes = mesh.vertices.shape[0]
    el = mesh.elements
    if mesh.dimension == 1:
        h = mesh.vertices[el[:, 1]] - mesh.vertices[el[:, 0]]
        if which == "mass":
            local = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
            vals = h[:, None, None] * local
        else:
            local = np.array([[1.0, -1.0], [-1.0, 1.0]])
            vals = local / h[:, None, None]
        nv = 2
    else:
        b, c, area = _triangle_geometry(mesh)
        if which == "mass":
            local = (np.ones((3, 3)) + np.eye(3)) / 12.0
            vals = area[:, None, None] * local
        else:
            vals = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (
                4.0 * area[:, None, None]
            )
        nv = 3
    rows = np.repeat(el, nv, axis=1).ravel()
    cols = np.tile(el, (1, nv)).ravel()
    full = sp.coo_matrix(
        (vals.ravel(), (rows, cols)), shape=(n_nodes, n_nodes)
    ).tocsr()
    full.sort_indices()
    return full


def _get_matrix(mesh, which, interior_only):
    cache = mesh._mass if which == "mass" else mesh._stiffness
    if interior_only not in cache:
        if interior_only:
            full = _get_matrix(mesh, which, False)
            idx = mesh.interior_nodes
            restricted = full[idx, :][:, idx].tocsr()
            restricted.sort_indices()
            cache[True] = restricted
        else:
            cache[False] = _assemble_matrix(mesh, which)
    return cache[interior_only]


def assemble_mass(mesh, interior_only=True):
    """Mass matrix in CSR form, by default restricted to interior unknowns."""
    return _get_matrix(mesh, "mass", interior_only)


def assemble_stiffness(mesh, interior_only=True):
    """Stiffness matrix in CSR form, by default restricted to interior unknowns."""
    return _get_matrix(mesh, "stiffness", interior_only)


_TRI_RULES = {
    1: (np.array([[1.0, 1.0, 1.0]]) / 3.0, np.array([1.0])),
    3: (
        np.array(
            [
                [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            ]
        ),
        np.array([1.0, 1.0, 1.0]) / 3.0,
    ),
    4: (
        np.array(
            [
                [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                [0.6, 0.2, 0.2],
                [0.2, 0.6, 0.2],
                [0.2, 0.2, 0.6],
            ]
        ),
        np.array([-27.0, 25.0, 25.0, 25.0]) / 48.0,
    ),
    6: (
        np.array(
            [
                [0.816847572980459, 0.091576213509771, 0.091576213509771],
                [0.091576213509771, 0.816847572980459, 0.091576213509771],
                [0.091576213509771, 0.091576213509771, 0.816847572980459],
                [0.108103018168070, 0.445948490915965, 0.445948490915965],
                [0.445948490915965, 0.108103018168070, 0.445948490915965],
                [0.445948490915965, 0.445948490915965, 0.108103018168070],
            ]
        ),
        np.array(
            [
                0.109951743655322,
                0.109951743655322,
                0.109951743655322,
                0.223381589678011,
                0.223381589678011,
                0.223381589678011,
            ]
        ),
    ),
    7: (
        np.array(
            [
                [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                [0.797426985353087, 0.101286507323456, 0.101286507323456],
                [0.101286507323456, 0.797426985353087, 0.101286507323456],
                [0.101286507323456, 0.101286507323456, 0.797426985353087],
                [0.059715871789770, 0.470142064105115, 0.470142064105115],
                [0.470142064105115, 0.059715871789770, 0.470142064105115],
                [0.470142064105115, 0.470142064105115, 0.059715871789770],
            ]
        ),
        np.array(
            [
                0.225,
                0.125939180544827,
                0.125939180544827,
                0.125939180544827,
                0.132394152788506,
                0.132394152788506,
                0.132394152788506,
            ]
        ),
    ),
}

_MAX_QUAD = 7


def _gauss_rule_1d(npoints):
    if not 1 <= npoints <= _MAX_QUAD:
        raise ValueError(f"1D quadrature supports 1..{_MAX_QUAD} points, got {npoints}")
    nodes, weights = np.polynomial.legendre.leggauss(int(npoints))
    # reference element [0, 1] in barycentric form
    lam = 0.5 * (nodes + 1.0)
    return lam, 0.5 * weights


def _tri_rule(npoints):
    if npoints not in _TRI_RULES:
        raise ValueError(
            f"no {npoints}-point triangle rule; available: {sorted(_TRI_RULES)}"
        )
    return _TRI_RULES[npoints]


def _quad_points_1d(mesh, quad_order):
    lam, w = _gauss_rule_1d(quad_order)
    el = mesh.elements
    x0 = mesh.vertices[el[:, 0]]
    x1 = mesh.vertices[el[:, 1]]
    h = x1 - x0
    xq = x0[:, None] + h[:, None] * lam[None, :]
    wq = h[:, None] * w[None, :]
    return xq, wq, lam


def _quad_points_2d(mesh, quad_order):
    lam, w = _tri_rule(quad_order)
    p = mesh.vertices[mesh.elements]
    xq = np.einsum("qs,esd->eqd", lam, p)
    _, _, area = _triangle_geometry(mesh)
    wq = area[:, None] * w[None, :]
    return xq, wq, lam


def assemble_load(mesh, g, quad_order=3, interior_only=True):
    """Load vector (g, phi_i) by per-element Gauss quadrature.

    In 1D the callable receives an array of coordinates; in 2D it receives
    two arrays (x, y).  quad_order counts quadrature points per element.
    """
    n_nodes = mesh.vertices.shape[0]
    vec = np.zeros(n_nodes)
    el = mesh.elements
    if mesh.dimension == 1:
        xq, wq, lam = _quad_points_1d(mesh, quad_order)
        gq = g(xq)
        shapes = np.stack([1.0 - lam, lam])  # (2, nq)
        for s in range(2):
            np.add.at(vec, el[:, s], np.sum(wq * gq * shapes[s][None, :], axis=1))
    else:
        xq, wq, lam = _quad_points_2d(mesh, quad_order)
        gq = g(xq[:, :, 0], xq[:, :, 1])
        for s in range(3):
            np.add.at(vec, el[:, s], np.sum(wq * gq * lam[None, :, s], axis=1))
    if interior_only:
        return vec[mesh.interior_nodes]
    return vec


def assemble_grad_load(mesh, grad, quad_order=3, interior_only=True):
    """Vector (grad g, grad phi_i); grad returns g' in 1D, (gx, gy) in 2D."""
    n_nodes = mesh.vertices.shape[0]
    vec = np.zeros(n_nodes)
    el = mesh.elements
    if mesh.dimension == 1:
        xq, wq, _ = _quad_points_1d(mesh, quad_order)
        h = mesh.vertices[el[:, 1]] - mesh.vertices[el[:, 0]]
        gq = grad(xq)
        integral = np.sum(wq * gq, axis=1)
        np.add.at(vec, el[:, 0], -integral / h)
        np.add.at(vec, el[:, 1], integral / h)
    else:
        b, c, area = _triangle_geometry(mesh)
        xq, wq, _ = _quad_points_2d(mesh, quad_order)
        gx, gy = grad(xq[:, :, 0], xq[:, :, 1])
        ix = np.sum(wq * gx, axis=1)
        iy = np.sum(wq * gy, axis=1)
        for s in range(3):
            np.add.at(vec, el[:, s], (ix * b[:, s] + iy * c[:, s]) / (2.0 * area))
    if interior_only:
        return vec[mesh.interior_nodes]
    return vec


@dataclass(frozen=True)
class FeFunction:
    """P1 function with homogeneous Dirichlet values, stored by its
    interior coefficients."""

    coeffs: np.ndarray
    mesh: SpatialMesh

    def __post_init__(self):
        if self.coeffs.shape != (self.mesh.num_interior,):
            raise ValueError(
                f"expected {self.mesh.num_interior} coefficients, "
                f"got shape {self.coeffs.shape}"
            )

    def nodal_values(self):
        """Coefficients extended by zeros on the boundary nodes."""
        z = np.zeros(self.mesh.vertices.shape[0])
        z[self.mesh.interior_nodes] = self.coeffs
        return z


def spd_solve(matrix, rhs, tol=1e-12, x0=None, max_iter=None):
    """Jacobi-preconditioned conjugate gradients for SPD systems.

    Iterates until ||rhs - A x|| <= tol * ||rhs||.  Deterministic: fixed
    iteration order, no randomization.  Returns (x, iterations) and raises
    RuntimeError with the final residual if max_iter is exhausted.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros(n), 0
    dinv = 1.0 / matrix.diagonal()
    if x0 is None:
        x = np.zeros(n)
        r = rhs.copy()
    else:
        x = np.array(x0, dtype=float)
        r = rhs - matrix @ x
    target = tol * bnorm
    if max_iter is None:
        max_iter = 10 * n + 100
    res = np.linalg.norm(r)
    if res <= target:
        return x, 0
    z = dinv * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        ap = matrix @ p
        alpha = rz / (p @ ap)
        x += alpha * p
        r -= alpha * ap
        res = np.linalg.norm(r)
        if res <= target:
            return x, it
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise RuntimeError(
        f"CG did not reach tol={tol} within {max_iter} iterations; "
        f"final relative residual {res / bnorm:.3e}"
    )


def l2_projection(mesh, g, quad_order=3, tol=1e-12):
    """L2 projection of g onto the P1 space with zero boundary values."""
    b = assemble_load(mesh, g, quad_order)
    x, _ = spd_solve(assemble_mass(mesh), b, tol)
    return FeFunction(x, mesh)


def ritz_projection(mesh, grad, quad_order=3, tol=1e-12):
    """Ritz projection determined by the gradient of the target function.

    Solves (grad u_h, grad phi_i) = (grad g, grad phi_i) for all interior i;
    on a 1D mesh this reproduces the nodal interpolant of g.
    """
    b = assemble_grad_load(mesh, grad, quad_order)
    x, _ = spd_solve(assemble_stiffness(mesh), b, tol)
    return FeFunction(x, mesh)


def grad_norm_sq(u):
    """Squared H1 seminorm, computed as the stiffness quadratic form."""
    a = assemble_stiffness(u.mesh)
    return float(u.coeffs @ (a @ u.coeffs))


def l2_norm(u):
    """L2 norm, computed as the mass quadratic form."""
    b = assemble_mass(u.mesh)
    return math.sqrt(max(float(u.coeffs @ (b @ u.coeffs)), 0.0))


def _element_gradients(u):
    z = u.nodal_values()
    mesh = u.mesh
    el = mesh.elements
    if mesh.dimension == 1:
        h = mesh.vertices[el[:, 1]] - mesh.vertices[el[:, 0]]
        return (z[el[:, 1]] - z[el[:, 0]]) / h
    b, c, area = _triangle_geometry(mesh)
    zs = z[el]
    gx = np.sum(zs * b, axis=1) / (2.0 * area)
    gy = np.sum(zs * c, axis=1) / (2.0 * area)
    return gx, gy


def h1_seminorm_error(u, exact_grad, quad_order=3):
    """H1 seminorm of u minus a function given by its gradient."""
    mesh = u.mesh
    if mesh.dimension == 1:
        gh = _element_gradients(u)
        xq, wq, _ = _quad_points_1d(mesh, quad_order)
        diff = gh[:, None] - exact_grad(xq)
        total = np.sum(wq * diff**2)
    else:
        gx, gy = _element_gradients(u)
        xq, wq, _ = _quad_points_2d(mesh, quad_order)
        ex, ey = exact_grad(xq[:, :, 0], xq[:, :, 1])
        total = np.sum(wq * ((gx[:, None] - ex) ** 2 + (gy[:, None] - ey) ** 2))
    return math.sqrt(max(total, 0.0))


def l2_error(u, exact, quad_order=3):
    """L2 norm of u minus a pointwise-evaluable function."""
    mesh = u.mesh
    z = u.nodal_values()
    el = mesh.elements
    if mesh.dimension == 1:
        xq, wq, lam = _quad_points_1d(mesh, quad_order)
        uh = z[el[:, 0]][:, None] * (1.0 - lam)[None, :] + z[el[:, 1]][:, None] * lam[None, :]
        diff = uh - exact(xq)
        total = np.sum(wq * diff**2)
    else:
        xq, wq, lam = _quad_points_2d(mesh, quad_order)
        uh = np.einsum("es,qs->eq", z[el], lam)
        diff = uh - exact(xq[:, :, 0], xq[:, :, 1])
        total = np.sum(wq * diff**2)
    return math.sqrt(max(total, 0.0))
