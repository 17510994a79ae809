"""Caputo-L1 time stepping for the fine-scale and homogenized problems.

One step of the scheme solves, on the Dirichlet dof space,

    (M + Gamma(2-a) dt^a A) u^{k+1}
        = M sum_{j=0}^{k-1} (b_j - b_{j+1}) u^{k-j} + b_k l_a

where M and A are the Q1 mass and stiffness matrices, b_j are the L1
weights and l_a is the load vector of the initial datum,
(l_a)_p = int_D a(x) phi_p dx.  The initial datum enters the scheme only
through the b_k memory term; its nodal interpolant is stored as u^0 for
output and error reporting.

Time convention: u^k approximates u(k*dt) with 0-based k (the 1-based
snapshot indices used for figures map to k-1).  The memory sum touches all
k previous fields, so a full run costs O(N^2) work in time; the per-step
touch counts are recorded for diagnostics.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import fem
from .fields import CoefficientField
from .grid import DIRICHLET, DofMap, StructuredGrid2D, interior_dof_map, make_grid
from .sparse_linalg import SparseMatrix, SolveReport, SolverFailure, cg_solve


@dataclass
class L1Weights:
    """L1 weights b_j = (j+1)^{1-a} - j^{1-a} and the stiffness scale factor."""

    alpha: float
    dt: float
    b: np.ndarray          # (n_steps + 1,)
    gamma_factor: float    # Gamma(2 - alpha) * dt**alpha

    @property
    def memory_coefficients(self) -> np.ndarray:
        """d_j = b_j - b_{j+1}, the coefficients of the history sum."""
        return self.b[:-1] - self.b[1:]


def l1_weights(alpha: float, n_steps: int, dt: float) -> L1Weights:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    j = np.arange(n_steps + 1, dtype=float)
    b = (j + 1.0) ** (1.0 - alpha) - j ** (1.0 - alpha)
    return L1Weights(alpha, dt, b, math.gamma(2.0 - alpha) * dt ** alpha)


class _Stepper:
    """Caches the step matrix M + gamma A and the a-load across steps."""

    def __init__(self, system: fem.AssembledSystem, weights: L1Weights,
                 a_load: np.ndarray, tol: float = 1e-10, precond: str = "jacobi"):
        self.system = system
        self.weights = weights
        self.a_load = np.asarray(a_load, dtype=float)
        self.tol = tol
        self.precond = precond
        self.matrix = SparseMatrix(system.mass.csr
                                   + weights.gamma_factor * system.stiffness.csr)
        self._d = weights.memory_coefficients

    def step(self, history: np.ndarray, x0=None) -> tuple[np.ndarray, SolveReport]:
        """Advance from history u^0..u^k (rows) to u^{k+1}."""
        k = history.shape[0] - 1
        if k >= len(self.weights.b):
            raise ValueError(f"history of length {k + 1} exceeds the weight table")
        if k == 0:
            rhs = self.weights.b[0] * self.a_load
        else:
            # sum_{j=0}^{k-1} (b_j - b_{j+1}) u^{k-j}  ==  coeff d[k-m] on u^m
            combo = self._d[:k][::-1] @ history[1:k + 1]
            rhs = self.system.mass.csr @ combo + self.weights.b[k] * self.a_load
        u, report = cg_solve(self.matrix, rhs, tol=self.tol,
                             precond=self.precond,
                             x0=history[k] if x0 is None else x0)
        if not report.converged:
            raise SolverFailure(
                f"time step {k + 1} did not converge "
                f"(residual {report.final_relative_residual:.3e})", report)
        return u, report


def step_scheme(system: fem.AssembledSystem, weights: L1Weights,
                history: np.ndarray, a_load: np.ndarray,
                tol: float = 1e-10) -> tuple[np.ndarray, SolveReport]:
    """One L1 step: next dof field from the history u^0..u^k (rows).

    Convenience wrapper for single steps; runs use an internal stepper that
    caches the system matrix across the whole time loop.
    """
    history = np.atleast_2d(np.asarray(history, dtype=float))
    return _Stepper(system, weights, a_load, tol=tol).step(history)


@dataclass
class TimeFractionalRun:
    """Full history of an L1-stepped solve on the physical grid."""

    grid: StructuredGrid2D
    dof_map: DofMap
    alpha: float
    dt: float
    T: float
    n_steps: int
    coefficient: str
    history_dofs: np.ndarray       # (n_steps + 1, total_dofs)
    u0_nodal: np.ndarray           # nodal interpolant of a
    reports: list[SolveReport] = dataclass_field(default_factory=list)
    touched_history: list[int] = dataclass_field(default_factory=list)

    def nodal(self, k: int) -> np.ndarray:
        """Nodal field at step k (0-based); boundary values are zero for k >= 1."""
        if not 0 <= k <= self.n_steps:
            raise IndexError(f"step {k} outside 0..{self.n_steps}")
        if k == 0:
            return self.u0_nodal.copy()
        out = np.zeros(self.grid.node_count)
        out[self.dof_map.dof_to_node] = self.history_dofs[k]
        return out

    def step_of_time(self, t: float) -> int:
        """Step index of a lattice time; no interpolation in time."""
        k = round(t / self.dt)
        if not 0 <= k <= self.n_steps or abs(k * self.dt - t) > 1e-9:
            raise ValueError(f"time {t} is not on the lattice with dt={self.dt}")
        return int(k)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def solver_summary(self) -> dict:
        its = [r.iterations for r in self.reports]
        res = [r.final_relative_residual for r in self.reports]
        return {
            "steps": self.n_steps,
            "total_iterations": int(sum(its)),
            "max_iterations": int(max(its)) if its else 0,
            "max_final_relative_residual": max(res) if res else 0.0,
            "all_converged": all(r.converged for r in self.reports),
        }


def _resolve_steps(dt: float, T: float) -> int:
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-12 * max(1.0, T):
        raise ValueError(f"dt={dt} does not divide T={T}")
    return int(n)


def _run_scheme(system: fem.AssembledSystem, alpha: float, dt: float, T: float,
                a, coefficient_label: str, tol: float) -> TimeFractionalRun:
    n_steps = _resolve_steps(dt, T)
    weights = l1_weights(alpha, n_steps, dt)
    grid, dmap = system.grid, system.dof_map

    a_load = fem.project_load(grid, dmap, a)
    u0_nodal = fem.interpolate(grid, a)

    history = np.zeros((n_steps + 1, dmap.total_dofs))
    history[0] = u0_nodal[dmap.dof_to_node]

    run = TimeFractionalRun(grid, dmap, alpha, dt, T, n_steps,
                            coefficient_label, history, u0_nodal)
    stepper = _Stepper(system, weights, a_load, tol=tol)
    for k in range(n_steps):
        u, report = stepper.step(history[:k + 1])
        history[k + 1] = u
        run.reports.append(report)
        run.touched_history.append(k)
    return run


def run_fine(field: CoefficientField, eps: float, alpha: float, grid_n: int,
             dt: float, T: float, a, tol: float = 1e-10) -> TimeFractionalRun:
    """Fine-scale solve with the eps-periodic coefficient kappa(x/eps)."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if grid_n < 16.0 / eps:
        warnings.warn(f"grid_n={grid_n} under-resolves eps={eps} "
                      f"(recommended grid_n >= {16.0 / eps:.0f})", stacklevel=2)
    grid = make_grid(grid_n, DIRICHLET)
    dmap = interior_dof_map(grid)

    def kappa_eps(x1, x2):
        return field(x1 / eps, x2 / eps)

    system = fem.assemble_system(grid, kappa_eps, dmap)
    label = f"fine(field={field.id}, eps={eps:g})"
    return _run_scheme(system, alpha, dt, T, a, label, tol)


def run_homogenized(kappa_star, alpha: float, grid_n: int, dt: float, T: float,
                    a, tol: float = 1e-10) -> TimeFractionalRun:
    """Homogenized solve with a constant (scalar or 2x2) coefficient.

    Defaults to the same mesh size as the fine solve; a coarser grid_n may
    be passed since the coefficient has no microscale."""
    kappa_star = np.asarray(kappa_star, dtype=float)
    if kappa_star.ndim == 0:
        coeff = float(kappa_star)
        label = f"homogenized(kappa={coeff:g})"
    elif kappa_star.shape == (2, 2):
        coeff = kappa_star
        label = "homogenized(kappa_star)"
    else:
        raise ValueError(f"kappa_star must be scalar or 2x2, got shape {kappa_star.shape}")
    grid = make_grid(grid_n, DIRICHLET)
    dmap = interior_dof_map(grid)
    system = fem.assemble_system(grid, coeff, dmap)
    return _run_scheme(system, alpha, dt, T, a, label, tol)
