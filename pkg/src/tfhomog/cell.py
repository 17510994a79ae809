"""Cell problems on the periodic unit cell and the effective tensor.

For each coordinate direction j the corrector chi_j in the zero-mean
periodic space solves

    int_Y kappa grad(chi_j) . grad(v) dy = - int_Y kappa e_j . grad(v) dy

for all periodic test functions v.  The singular constant mode is removed
by pinning one dof and shifting the solution to zero discrete mean
afterwards; for this symmetric problem that yields the same representative
as a Lagrange multiplier would.

The effective tensor follows by quadrature of

    kappa*_ij = (1/|Y|) int_Y kappa (delta_ij + d(chi_j)/d(y_i)) dy

with the same 2x2 Gauss rule used for assembly.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import fem
from .fields import CoefficientField
from .grid import PERIODIC, StructuredGrid2D, DofMap, make_grid, periodic_dof_map, periodic_wrap
from .sparse_linalg import SparseMatrix, SolverFailure, cg_solve

#: cell mesh matching a 2^-6 maximal mesh size
DEFAULT_CELL_N = 64

_ASYMMETRY_LIMIT = 1e-6


@dataclass
class CellSolution:
    """Correctors chi_1, chi_2 and the effective tensor on the cell grid."""

    cell_grid: StructuredGrid2D
    dof_map: DofMap
    field_id: str
    chi: np.ndarray            # (2, node_count) nodal, zero mean, periodic
    kappa_star: np.ndarray     # (2, 2) symmetrized
    asymmetry: float           # |k*_12 - k*_21| before symmetrization
    h1_seminorms: np.ndarray   # (2,) |chi_j|_{H1(Y)}
    means: np.ndarray          # (2,) discrete means of chi_j (about 0)
    reports: list = dataclass_field(default_factory=list)

    def _locate(self, x1, x2):
        n, h = self.cell_grid.n, self.cell_grid.h
        w1 = periodic_wrap(x1)
        w2 = periodic_wrap(x2)
        e1 = np.minimum((w1 / h).astype(np.int64), n - 1)
        e2 = np.minimum((w2 / h).astype(np.int64), n - 1)
        return e1, e2, w1 / h - e1, w2 / h - e2

    def chi_at(self, j: int, x1, x2) -> np.ndarray:
        """chi_j at arbitrary points by periodic wrap + bilinear interpolation."""
        e1, e2, t1, t2 = self._locate(x1, x2)
        stride = self.cell_grid.n + 1
        base = e1 + e2 * stride
        z = self.chi[j]
        return ((1 - t1) * (1 - t2) * z[base] + t1 * (1 - t2) * z[base + 1]
                + t1 * t2 * z[base + stride + 1] + (1 - t1) * t2 * z[base + stride])

    def chi_grad_at(self, j: int, x1, x2) -> tuple[np.ndarray, np.ndarray]:
        """Gradient of the interpolated corrector at arbitrary points.

        Piecewise Q1 derivative on the cell grid; used when the corrector
        term's gradient is wanted by chain rule rather than by
        differentiating a coarse re-interpolation.
        """
        e1, e2, t1, t2 = self._locate(x1, x2)
        h = self.cell_grid.h
        stride = self.cell_grid.n + 1
        base = e1 + e2 * stride
        z = self.chi[j]
        z00, z10 = z[base], z[base + 1]
        z01, z11 = z[base + stride], z[base + stride + 1]
        g1 = ((1 - t2) * (z10 - z00) + t2 * (z11 - z01)) / h
        g2 = ((1 - t1) * (z01 - z00) + t1 * (z11 - z10)) / h
        return g1, g2


def _discrete_mean(grid: StructuredGrid2D, dof_values: np.ndarray) -> float:
    # on the torus every periodic Q1 basis function integrates to h^2
    return float(grid.h ** 2 * dof_values.sum())


def solve_cell(field: CoefficientField, n_cell: int = DEFAULT_CELL_N,
               tol: float = 1e-12) -> CellSolution:
    """Solve both cell problems and compute the effective tensor.

    The pinned system is SPD, solved by Jacobi-preconditioned CG.  A tight
    tolerance is cheap at cell sizes and keeps the kappa* error far below
    the homogenization errors measured downstream.
    """
    if field.mu <= 0:
        raise ValueError(f"field {field.id!r} is not elliptic")
    grid = make_grid(n_cell, PERIODIC)
    dmap = periodic_dof_map(grid)
    K = fem.assemble_stiffness(grid, field, dmap)
    # pin dof 0 to remove the constant nullspace
    Kp = SparseMatrix(K.csr[1:, :][:, 1:])

    node_count = grid.node_count
    chi = np.zeros((2, node_count))
    seminorms = np.zeros(2)
    means = np.zeros(2)
    reports = []
    for j in (0, 1):
        rhs = -fem.gradient_load(grid, dmap, field, j)
        x = np.zeros(dmap.total_dofs)
        pinned, report = cg_solve(Kp, rhs[1:], tol=tol, precond="jacobi")
        reports.append(report)
        if not report.converged:
            raise SolverFailure(
                f"cell problem chi_{j + 1} did not converge "
                f"(residual {report.final_relative_residual:.3e} after {report.iterations} iterations)",
                report)
        x[1:] = pinned
        x -= _discrete_mean(grid, x)
        means[j] = _discrete_mean(grid, x)
        nodal = x[dmap.node_to_dof]
        chi[j] = nodal
        l2, h1, _, _ = fem.norms(grid, nodal, np.zeros(node_count))
        seminorms[j] = np.sqrt(max(h1 ** 2 - l2 ** 2, 0.0))

    sol = CellSolution(grid, dmap, field.id, chi, np.eye(2), 0.0,
                       seminorms, means, reports)
    sol.kappa_star, sol.asymmetry = _effective_tensor_raw(sol, field)
    if sol.asymmetry > _ASYMMETRY_LIMIT:
        raise SolverFailure(f"effective tensor asymmetry {sol.asymmetry:.3e} "
                            f"exceeds {_ASYMMETRY_LIMIT}")
    return sol


def _effective_tensor_raw(sol: CellSolution, field: CoefficientField):
    grid = sol.cell_grid
    X, Y = fem._gauss_coords(grid)
    kap = np.asarray(field(X, Y), dtype=float)
    w = fem.GAUSS_WEIGHTS * grid.h ** 2
    cell_area = 1.0  # |Y|, kept explicit for non-unit cells
    kstar = np.zeros((2, 2))
    for j in (0, 1):
        _, grads = fem._element_values_and_gradients(grid, sol.chi[j])
        for i in (0, 1):
            delta = 1.0 if i == j else 0.0
            kstar[i, j] = np.einsum("eg,eg,g->", kap, delta + grads[:, :, i], w) / cell_area
    asym = abs(kstar[0, 1] - kstar[1, 0])
    return 0.5 * (kstar + kstar.T), asym


def effective_tensor(sol: CellSolution, field: CoefficientField) -> np.ndarray:
    """Quadrature evaluation of the homogenized tensor, symmetrized.

    Asymmetry beyond 1e-6 signals a broken cell solve and raises.
    """
    kstar, asym = _effective_tensor_raw(sol, field)
    if asym > _ASYMMETRY_LIMIT:
        raise SolverFailure(f"effective tensor asymmetry {asym:.3e} exceeds {_ASYMMETRY_LIMIT}")
    return kstar
