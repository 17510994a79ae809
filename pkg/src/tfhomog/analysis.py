"""Error reporting, convergence-rate fits, and independent oracles.

The oracles are deliberately independent of the main solver paths:

* ``mittag_leffler`` evaluates E_alpha(z) for real z <= 0 by power series
  near zero and by the complete-monotonicity spectral integral farther out,
  for checking modal decay of constant-coefficient runs;
* ``backward_euler_reference`` is a plain implicit-Euler march, the
  alpha -> 1 limit of the L1 scheme;
* ``layered_cell_oracle`` solves the one-dimensional periodic cell problem
  of a layered medium with P1 elements, giving the classical
  harmonic/arithmetic effective pair without touching the 2D machinery.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad

from . import fem
from .corrector import CorrectorField
from .fields import CoefficientField
from .sparse_linalg import SparseMatrix, SolverFailure, cg_solve
from .timefrac import TimeFractionalRun

DEFAULT_REPORT_TIMES = (0.1, 0.5, 1.0)


@dataclass
class ErrorRow:
    t: float
    abs_l2: float
    rel_l2: float
    abs_h1: float
    rel_h1: float


@dataclass
class ErrorReport:
    """Absolute and relative L2/H1 errors of U1 against the fine solution."""

    rows: list[ErrorRow]
    config: dict = dataclass_field(default_factory=dict)

    def row_at(self, t: float) -> ErrorRow:
        for row in self.rows:
            if abs(row.t - t) <= 1e-12:
                return row
        raise KeyError(f"no report row at t={t}")


def compare_runs(fine: TimeFractionalRun, u1_fields, config: dict | None = None) -> ErrorReport:
    """Error table of corrector fields against the fine run.

    ``u1_fields`` is an iterable of (t, nodal field) pairs or
    CorrectorField objects; times must lie on the run's time lattice.
    Relative errors are normalized by the fine solution's own norms.
    """
    rows = []
    for item in u1_fields:
        if isinstance(item, CorrectorField):
            t, u1 = item.time, item.u1
        else:
            t, u1 = item
        k = fine.step_of_time(t)
        u_fine = fine.nodal(k)
        l2d, h1d, l2u, h1u = fem.norms(fine.grid, u_fine, u1)
        rows.append(ErrorRow(t, l2d, l2d / l2u, h1d, h1d / h1u))
    return ErrorReport(rows, config or {})


@dataclass
class RateEstimate:
    eps_values: np.ndarray
    errors: np.ndarray
    rate: float        # fitted exponent p in error ~ C eps^p
    prefactor: float   # fitted C


def estimate_rate(points) -> RateEstimate:
    """Least-squares slope of log(error) against log(eps)."""
    pts = sorted(points, reverse=True)
    eps = np.array([p[0] for p in pts], dtype=float)
    err = np.array([p[1] for p in pts], dtype=float)
    if len(eps) < 2:
        raise ValueError("need at least two (eps, error) points")
    if np.any(eps <= 0) or np.any(err <= 0):
        raise ValueError("eps and error values must be positive")
    slope, intercept = np.polyfit(np.log(eps), np.log(err), 1)
    return RateEstimate(eps, err, float(slope), float(np.exp(intercept)))


# ---------------------------------------------------------------------------
# Mittag-Leffler oracle
# ---------------------------------------------------------------------------

_ML_WINDOW = 50.0
_SERIES_CUTOFF = 5.0
_SERIES_MAX_TERMS = 200


def _ml_series(alpha: float, z: float) -> tuple[float, float, bool]:
    """Kahan-compensated power series; returns (sum, max |term|, converged).

    For small alpha the terms can grow astronomically before the gamma in
    the denominator wins; such sums are useless in double precision, so the
    caller must reject non-converged results and any result whose peak term
    ate more digits than the accuracy target allows.
    """
    total = 0.0
    comp = 0.0
    peak = 0.0
    converged = False
    for m in range(_SERIES_MAX_TERMS):
        term = z ** m / math.gamma(alpha * m + 1.0)
        peak = max(peak, abs(term))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-18 * max(1.0, abs(total)):
            converged = True
            break
        if peak > 1e30:
            break
    return total, peak, converged


def _ml_integral(alpha: float, x: float) -> float:
    """Spectral integral for E_alpha(-x), x > 0, 0 < alpha < 1:

    E_a(-x) = sin(a pi)/pi * int_0^inf  x r^{a-1} e^{-r}
              / (r^{2a} + 2 x r^a cos(a pi) + x^2) dr,

    written in the substituted variable u = r^a.  The integrand peaks near
    u = x when alpha is close to 1, so the inner interval is split there.
    """
    th = alpha * math.pi

    def f(u):
        return math.exp(-u ** (1.0 / alpha)) / (u * u + 2.0 * x * u * math.cos(th) + x * x)

    cut = max(2.0, 2.0 * x)
    inner, _ = quad(f, 0.0, cut, points=[min(x, cut)], limit=400)
    outer, _ = quad(f, cut, np.inf, limit=400)
    return x * math.sin(th) / (alpha * math.pi) * (inner + outer)


def mittag_leffler(alpha: float, z: float) -> float:
    """E_alpha(z) for real z in [-50, 0] and alpha in (0, 1].

    Power series with compensated summation for small |z|; spectral
    integral beyond (and whenever the series terms grow enough to threaten
    more digits than the 1e-8 accuracy target).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not -_ML_WINDOW <= z <= 0.0:
        raise ValueError(f"z={z} outside the supported window [-{_ML_WINDOW:g}, 0]")
    if alpha == 1.0:
        return math.exp(z)
    if z == 0.0:
        return 1.0
    if -z <= _SERIES_CUTOFF:
        total, peak, converged = _ml_series(alpha, z)
        if converged and peak <= 1e8:
            return total
    return _ml_integral(alpha, -z)


# ---------------------------------------------------------------------------
# Backward-Euler reference (alpha -> 1 oracle)
# ---------------------------------------------------------------------------

def backward_euler_reference(system: fem.AssembledSystem, dt: float, T: float,
                             a_load, tol: float = 1e-12) -> TimeFractionalRun:
    """Implicit Euler (M + dt A) u^{k+1} = M u^k, started from the L2
    projection u^0 = M^{-1} a_load (so the first step matches the L1 scheme
    at alpha = 1 exactly).  Test oracle only."""
    a_load = np.asarray(a_load, dtype=float)
    n_steps = round(T / dt)
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-12 * max(1.0, T):
        raise ValueError(f"dt={dt} does not divide T={T}")
    grid, dmap = system.grid, system.dof_map
    S = SparseMatrix(system.mass.csr + dt * system.stiffness.csr)
    M = system.mass

    u0, rep0 = cg_solve(M, a_load, tol=tol, precond="jacobi")
    if not rep0.converged:
        raise SolverFailure("mass projection of the initial datum failed", rep0)

    history = np.zeros((n_steps + 1, dmap.total_dofs))
    history[0] = u0
    u0_nodal = np.zeros(grid.node_count)
    u0_nodal[dmap.dof_to_node] = u0
    run = TimeFractionalRun(grid, dmap, 1.0, dt, T, n_steps,
                            "backward-euler", history, u0_nodal)
    run.reports.append(rep0)
    for k in range(n_steps):
        rhs = M.csr @ history[k]
        u, rep = cg_solve(S, rhs, tol=tol, precond="jacobi", x0=history[k])
        if not rep.converged:
            raise SolverFailure(f"backward Euler step {k + 1} failed", rep)
        history[k + 1] = u
        run.reports.append(rep)
    return run


# ---------------------------------------------------------------------------
# Layered-medium cell oracle (1D P1, independent of the 2D path)
# ---------------------------------------------------------------------------

def layered_cell_oracle(profile, n: int = 4096) -> tuple[float, float]:
    """Effective pair (along, across) of a layered medium kappa(y1).

    Solves the 1D periodic cell problem for chi(y1) with P1 elements on n
    cells (element-midpoint coefficient values), then evaluates
    k_along = int kappa (1 + chi') and k_across = int kappa.  For any
    layered medium these converge to the harmonic and arithmetic means.
    """
    h = 1.0 / n
    mid = (np.arange(n) + 0.5) * h
    kap = np.asarray(profile(mid), dtype=float)
    if np.any(kap <= 0):
        raise ValueError("layered profile must be positive")
    # periodic P1 system: K chi = f, K tridiagonal with wraparound,
    # f_i = -int kappa phi_i' = kappa_right(i) - kappa_left(i); pin node 0
    k_right = kap                      # element between node i and i+1
    k_left = np.roll(kap, 1)           # element between node i-1 and i
    diag = (k_left + k_right) / h
    f = k_right - k_left
    rows = np.concatenate([np.arange(n), np.arange(n), np.arange(n)])
    cols = np.concatenate([np.arange(n), (np.arange(n) + 1) % n, (np.arange(n) - 1) % n])
    vals = np.concatenate([diag, -k_right / h, -k_left / h])
    K = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    Kp = SparseMatrix(K[1:, :][:, 1:])
    chi = np.zeros(n)
    sol, rep = cg_solve(Kp, f[1:], tol=1e-13, precond="jacobi")
    if not rep.converged:
        raise SolverFailure("1D layered cell solve failed", rep)
    chi[1:] = sol
    dchi = (np.roll(chi, -1) - chi) / h
    k_along = float(np.sum(kap * (1.0 + dchi)) * h)
    k_across = float(np.sum(kap) * h)
    return k_along, k_across


def voigt_reuss_bounds(field: CoefficientField, n: int = 512) -> tuple[float, float]:
    """Harmonic/arithmetic mean bracket of kappa over the cell, by
    midpoint sampling on an n x n lattice."""
    y = (np.arange(n) + 0.5) / n
    Y1, Y2 = np.meshgrid(y, y, indexing="ij")
    kap = np.asarray(field(Y1, Y2), dtype=float)
    return float(1.0 / np.mean(1.0 / kap)), float(np.mean(kap))
