"""Q1 bilinear finite elements on structured grids.

Assembles stiffness matrices with variable scalar or 2x2-tensor
coefficients, mass matrices, and load vectors, all with the same tensorized
2x2 Gauss-Legendre rule per element (exact for constant-coefficient Q1
stiffness and mass).  Dirichlet conditions are applied by dof elimination,
which keeps the systems symmetric positive definite.

Reference element is the unit square with corner ordering matching
grid.StructuredGrid2D.elements: (0,0), (1,0), (1,1), (0,1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import DofMap, StructuredGrid2D, CONSTRAINED
from .sparse_linalg import SparseMatrix

_G = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))
#: tensorized 2x2 Gauss points on the reference square, weights 1/4 each
GAUSS_POINTS = np.array([(a, b) for b in _G for a in _G])
GAUSS_WEIGHTS = np.full(4, 0.25)
QUADRATURE_ID = "gauss2x2"


def shape_values(pts) -> np.ndarray:
    """Q1 shape functions at reference points, shape (npts, 4)."""
    xi, eta = pts[:, 0], pts[:, 1]
    return np.stack([(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta],
                    axis=1)


def shape_gradients(pts) -> np.ndarray:
    """Reference gradients of the Q1 shape functions, shape (npts, 4, 2)."""
    xi, eta = pts[:, 0], pts[:, 1]
    d_xi = np.stack([-(1 - eta), (1 - eta), eta, -eta], axis=1)
    d_eta = np.stack([-(1 - xi), -xi, xi, (1 - xi)], axis=1)
    return np.stack([d_xi, d_eta], axis=2)


_N = shape_values(GAUSS_POINTS)          # (4, 4)
_DN = shape_gradients(GAUSS_POINTS)      # (4, 4, 2)
# constant-coefficient local matrices (h-independent for stiffness)
_KREF = np.einsum("g,gpd,gqd->pq", GAUSS_WEIGHTS, _DN, _DN)
_MREF = np.einsum("g,gp,gq->pq", GAUSS_WEIGHTS, _N, _N)


def _gauss_coords(grid: StructuredGrid2D):
    """Physical Gauss point coordinates per element, two (E, 4) arrays."""
    ox, oy = grid.element_origins()
    X = ox[:, None] + GAUSS_POINTS[None, :, 0] * grid.h
    Y = oy[:, None] + GAUSS_POINTS[None, :, 1] * grid.h
    return X, Y


def _check_finite(vals, X, Y, what):
    if np.all(np.isfinite(vals)):
        return
    bad = np.argwhere(~np.isfinite(np.atleast_1d(vals)))
    e, g = bad[0][0], bad[0][1] if bad.shape[1] > 1 else 0
    raise ValueError(f"non-finite {what} sample at quadrature point "
                     f"({X[e, g]:.6g}, {Y[e, g]:.6g})")


def _sample_coefficient(coefficient, X, Y):
    """Sample a scalar or 2x2-tensor coefficient at Gauss points.

    Returns ("scalar", (E,4) array) or ("tensor", (E,4,2,2) array).
    Accepted inputs: a number, a constant (2,2) array, a callable
    f(x1, x2) returning scalars, or a callable returning (..., 2, 2).
    """
    if np.isscalar(coefficient):
        return "scalar", np.full(X.shape, float(coefficient))
    if isinstance(coefficient, np.ndarray):
        if coefficient.shape != (2, 2):
            raise ValueError(f"tensor coefficient must be 2x2, got shape {coefficient.shape}")
        if abs(coefficient[0, 1] - coefficient[1, 0]) > 1e-10 * max(1.0, np.abs(coefficient).max()):
            raise ValueError("tensor coefficient must be symmetric")
        return "tensor", np.broadcast_to(coefficient, X.shape + (2, 2))
    if callable(coefficient):
        vals = np.asarray(coefficient(X, Y), dtype=float)
        if vals.shape == X.shape:
            _check_finite(vals, X, Y, "coefficient")
            return "scalar", vals
        if vals.shape == X.shape + (2, 2):
            _check_finite(vals, X, Y, "coefficient")
            return "tensor", vals
        raise ValueError(f"coefficient callable returned shape {vals.shape}, "
                         f"expected {X.shape} or {X.shape + (2, 2)}")
    raise TypeError(f"cannot interpret coefficient of type {type(coefficient).__name__}")


def _scatter(grid: StructuredGrid2D, dof_map: DofMap, local: np.ndarray) -> SparseMatrix:
    """Assemble per-element 4x4 blocks into a CSR matrix on the dof space."""
    ed = dof_map.node_to_dof[grid.elements]                 # (E, 4)
    rows = np.repeat(ed, 4, axis=1).ravel()
    cols = np.tile(ed, (1, 4)).ravel()
    vals = local.reshape(-1)
    keep = (rows != CONSTRAINED) & (cols != CONSTRAINED)
    nd = dof_map.total_dofs
    return SparseMatrix.from_triplets(rows[keep], cols[keep], vals[keep], (nd, nd))


def assemble_stiffness(grid: StructuredGrid2D, coefficient, dof_map: DofMap) -> SparseMatrix:
    """A[p,q] = sum_T int_T kappa grad(phi_q) . grad(phi_p) dx.

    Physical gradients are reference gradients / h and the element area is
    h^2, so the local blocks are h-independent for scalar coefficients.
    """
    X, Y = _gauss_coords(grid)
    kind, vals = _sample_coefficient(coefficient, X, Y)
    if kind == "scalar":
        local = np.einsum("eg,g,gpd,gqd->epq", vals, GAUSS_WEIGHTS, _DN, _DN)
    else:
        local = np.einsum("egdc,g,gpd,gqc->epq", vals, GAUSS_WEIGHTS, _DN, _DN)
    return _scatter(grid, dof_map, local)


def assemble_mass(grid: StructuredGrid2D, dof_map: DofMap) -> SparseMatrix:
    """Standard Q1 mass matrix (quadrature exact for Q1 x Q1 products)."""
    local = np.broadcast_to(_MREF * grid.h ** 2, (grid.element_count, 4, 4))
    return _scatter(grid, dof_map, local)


def project_load(grid: StructuredGrid2D, dof_map: DofMap, f) -> np.ndarray:
    """Load vector with components int_D f phi_p dx."""
    X, Y = _gauss_coords(grid)
    vals = np.asarray(f(X, Y), dtype=float)
    if vals.shape != X.shape:
        vals = np.broadcast_to(vals, X.shape)
    _check_finite(vals, X, Y, "load")
    fe = np.einsum("eg,g,gp->ep", vals, GAUSS_WEIGHTS, _N) * grid.h ** 2
    out = np.zeros(dof_map.total_dofs)
    ed = dof_map.node_to_dof[grid.elements]
    keep = ed != CONSTRAINED
    np.add.at(out, ed[keep], fe[keep])
    return out


def gradient_load(grid: StructuredGrid2D, dof_map: DofMap, coefficient, direction: int) -> np.ndarray:
    """Vector with components int kappa d(phi_p)/d(x_direction) dx.

    This is the right-hand side building block of the cell problems.
    """
    if direction not in (0, 1):
        raise ValueError("direction must be 0 or 1")
    X, Y = _gauss_coords(grid)
    kind, vals = _sample_coefficient(coefficient, X, Y)
    if kind != "scalar":
        raise ValueError("gradient_load expects a scalar coefficient")
    # physical gradient = reference gradient / h, area = h^2
    fe = np.einsum("eg,g,gp->ep", vals, GAUSS_WEIGHTS, _DN[:, :, direction]) * grid.h
    out = np.zeros(dof_map.total_dofs)
    ed = dof_map.node_to_dof[grid.elements]
    keep = ed != CONSTRAINED
    np.add.at(out, ed[keep], fe[keep])
    return out


def interpolate(grid: StructuredGrid2D, f) -> np.ndarray:
    """Nodal interpolant: f evaluated at the grid nodes."""
    vals = np.asarray(f(grid.node_x, grid.node_y), dtype=float)
    return np.broadcast_to(vals, grid.node_x.shape).copy()


def _element_values_and_gradients(grid: StructuredGrid2D, u: np.ndarray):
    """Values (E,4) and physical gradients (E,4,2) of a nodal field at Gauss points."""
    un = u[grid.elements]                                   # (E, 4)
    vals = un @ _N.T                                        # (E, 4g)
    grads = np.einsum("ep,gpd->egd", un, _DN) / grid.h      # (E, 4g, 2)
    return vals, grads


def norms(grid: StructuredGrid2D, u, v):
    """Quadrature L2 and full H1 norms of the Q1 interpolant difference.

    Returns (l2_of_diff, h1_of_diff, l2_of_u, h1_of_u) where the H1 norm is
    sqrt(L2^2 + seminorm^2).  The norms of u itself are returned so callers
    can form relative errors against the fine-scale solution.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (grid.node_count,) or v.shape != (grid.node_count,):
        raise ValueError(f"nodal fields must have length {grid.node_count}")
    w = GAUSS_WEIGHTS * grid.h ** 2
    du_vals, du_grads = _element_values_and_gradients(grid, u - v)
    u_vals, u_grads = _element_values_and_gradients(grid, u)

    l2d_sq = float(np.einsum("eg,g->", du_vals ** 2, w))
    semi_d_sq = float(np.einsum("egd,g->", du_grads ** 2, w))
    l2u_sq = float(np.einsum("eg,g->", u_vals ** 2, w))
    semi_u_sq = float(np.einsum("egd,g->", u_grads ** 2, w))
    return (np.sqrt(l2d_sq), np.sqrt(l2d_sq + semi_d_sq),
            np.sqrt(l2u_sq), np.sqrt(l2u_sq + semi_u_sq))


@dataclass
class AssembledSystem:
    """Stiffness + mass pair on a common dof space."""

    grid: StructuredGrid2D
    dof_map: DofMap
    stiffness: SparseMatrix
    mass: SparseMatrix
    quadrature: str = QUADRATURE_ID


def assemble_system(grid: StructuredGrid2D, coefficient, dof_map: DofMap | None = None) -> AssembledSystem:
    if dof_map is None:
        from .grid import dof_map_for
        dof_map = dof_map_for(grid)
    return AssembledSystem(grid, dof_map,
                           assemble_stiffness(grid, coefficient, dof_map),
                           assemble_mass(grid, dof_map))
