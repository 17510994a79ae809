"""First-order approximation of the fine-scale solution.

The plain first-order approximation adds the eps-scaled corrector to the
homogenized solution,

    U1(x, t) = u0(x, t) + eps chi_j(x/eps) du0/dx_j(x, t),

with the correctors interpolated off the cell grid.  The modified variant
multiplies the corrector term by eta(t; theta) (1 - zeta(x)), where zeta is
a C^2 spatial cutoff equal to 1 on the boundary and supported in the strip
of width eps, and eta ramps from 0 to 1 over [theta/2, theta].  The
modification restores the homogeneous boundary condition and the exact
initial datum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cell import CellSolution
from .grid import StructuredGrid2D
from .timefrac import TimeFractionalRun

GRADIENT_RECOVERY_ID = "node-averaged-element-gradients"


class CutoffSpatial:
    """Quintic-smoothstep boundary cutoff of width eps.

    zeta(x) = 1 - s(d/eps) with s the C^2 smoothstep 10 t^3 - 15 t^4 + 6 t^5
    and d = dist(x, boundary of the unit square) = min(x1, 1-x1, x2, 1-x2).
    Values are 1 on the boundary, 0 at distance >= eps, and the gradient is
    bounded by 1.875 / eps.
    """

    def __init__(self, eps: float):
        if eps <= 0:
            raise ValueError(f"cutoff width must be positive, got {eps}")
        self.eps = float(eps)

    @staticmethod
    def boundary_distance(x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        return np.minimum(np.minimum(x1, 1.0 - x1), np.minimum(x2, 1.0 - x2))

    def __call__(self, x1, x2):
        s = np.clip(self.boundary_distance(x1, x2) / self.eps, 0.0, 1.0)
        return 1.0 - s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


class CutoffTemporal:
    """Temporal ramp: 0 for t <= theta/2, 1 for t >= theta, linear between."""

    def __init__(self, theta: float, T: float | None = None):
        if theta <= 0 or (T is not None and theta > T):
            raise ValueError(f"theta must lie in (0, T], got theta={theta}, T={T}")
        self.theta = float(theta)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        half = 0.5 * self.theta
        return np.clip((t - half) / half, 0.0, 1.0)


def recover_gradient(grid: StructuredGrid2D, u) -> tuple[np.ndarray, np.ndarray]:
    """Nodal gradient by equal-weight averaging of adjacent element gradients.

    The Q1 gradient of an element, evaluated at one of its corners, equals
    the difference quotient along the grid line through that corner; the
    average over all elements sharing a node therefore reduces to centered
    differences at interior nodes and one-sided differences on the boundary.
    Exact for bilinear nodal fields.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.node_count,):
        raise ValueError(f"nodal field must have length {grid.node_count}")
    n, h = grid.n, grid.h
    U = u.reshape(n + 1, n + 1)          # [j, i]: y index first (x fastest)
    gx = np.empty_like(U)
    gx[:, 1:-1] = (U[:, 2:] - U[:, :-2]) / (2.0 * h)
    gx[:, 0] = (U[:, 1] - U[:, 0]) / h
    gx[:, -1] = (U[:, -1] - U[:, -2]) / h
    gy = np.empty_like(U)
    gy[1:-1, :] = (U[2:, :] - U[:-2, :]) / (2.0 * h)
    gy[0, :] = (U[1, :] - U[0, :]) / h
    gy[-1, :] = (U[-1, :] - U[-2, :]) / h
    return gx.ravel(), gy.ravel()


@dataclass
class CorrectorField:
    """Nodal first-order approximation at one time step."""

    u1: np.ndarray
    step: int                  # 0-based step index
    time: float
    eps: float
    gradient_recovery: str
    u0_run: TimeFractionalRun
    cell: CellSolution
    theta: float | None = None


def _corrector_term(u0_run: TimeFractionalRun, cell: CellSolution, eps: float,
                    k: int) -> tuple[np.ndarray, np.ndarray]:
    grid = u0_run.grid
    u0 = u0_run.nodal(k)
    gx, gy = recover_gradient(grid, u0)
    chi1 = cell.chi_at(0, grid.node_x / eps, grid.node_y / eps)
    chi2 = cell.chi_at(1, grid.node_x / eps, grid.node_y / eps)
    return u0, eps * (chi1 * gx + chi2 * gy)


def build_U1(u0_run: TimeFractionalRun, cell: CellSolution, eps: float,
             k: int) -> CorrectorField:
    """U1 = u0 + eps chi_j(x/eps) du0/dx_j at step k."""
    u0, term = _corrector_term(u0_run, cell, eps, k)
    return CorrectorField(u0 + term, k, k * u0_run.dt, eps,
                          GRADIENT_RECOVERY_ID, u0_run, cell)


def build_modified_u1(u0_run: TimeFractionalRun, cell: CellSolution, eps: float,
                      theta: float, k: int) -> CorrectorField:
    """Cut-off-modified variant; vanishes on the boundary at all times and
    equals the interpolated initial datum at k = 0."""
    grid = u0_run.grid
    eta = CutoffTemporal(theta, u0_run.T)
    zeta = CutoffSpatial(eps)
    u0, term = _corrector_term(u0_run, cell, eps, k)
    factor = float(eta(k * u0_run.dt)) * (1.0 - zeta(grid.node_x, grid.node_y))
    return CorrectorField(u0 + factor * term, k, k * u0_run.dt, eps,
                          GRADIENT_RECOVERY_ID, u0_run, cell, theta=theta)
