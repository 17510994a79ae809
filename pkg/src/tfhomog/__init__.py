"""Homogenization toolkit for time-fractional diffusion in periodic media.

Computes cell correctors and the homogenized tensor of an eps-periodic
diffusion coefficient, runs Caputo-L1 time-stepped Q1 finite element solves
of the fine-scale and homogenized problems on the unit square, assembles
the first-order approximation, and reports errors and convergence rates
across eps.
"""

__version__ = "0.1.0"

from .analysis import (RateEstimate, ErrorReport, backward_euler_reference,
                       compare_runs, estimate_rate, mittag_leffler)
from .cell import CellSolution, effective_tensor, solve_cell
from .corrector import (CorrectorField, CutoffSpatial, CutoffTemporal,
                        build_U1, build_modified_u1, recover_gradient)
from .fields import (CoefficientField, InitialData, constant, eval_initial,
                     eval_kappa, eval_kappa_eps, layered, parse_field,
                     parse_initial, piecewise_high, piecewise_low, rough_indicator,
                     smooth_high, smooth_low, smooth_poly)
from .fem import AssembledSystem, assemble_mass, assemble_stiffness, \
    assemble_system, interpolate, norms, project_load
from .grid import (DIRICHLET, PERIODIC, DofMap, StructuredGrid2D,
                   interior_dof_map, full_dof_map, make_grid, periodic_dof_map,
                   periodic_wrap)
from .sparse_linalg import SolveReport, SolverFailure, SparseMatrix, cg_solve, matvec
from .timefrac import (L1Weights, TimeFractionalRun, l1_weights, run_fine,
                       run_homogenized, step_scheme)

__all__ = [name for name in dir() if not name.startswith("_")]
