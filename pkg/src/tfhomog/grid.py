"""Structured rectangular meshes of the unit square.

Both the physical domain D = [0,1]^2 and the unit cell Y are discretized
with uniform n-by-n grids of square bilinear (Q1) elements.  The number of
cells per side is restricted to powers of two so that fine-grid nodes align
exactly with the boundaries of the 2^-m-periodic coefficient cells; this
keeps the oscillatory coefficient sampling free of interpolation artifacts.

Numbering conventions (fixed, so assembly is deterministic):
  * node (i, j) has index i + j*(n+1) and coordinates (i*h, j*h), exact
    in binary floating point for power-of-two n;
  * elements are numbered lexicographically and list their four corner
    nodes counterclockwise starting from the lower-left corner;
  * degrees of freedom are numbered lexicographically over unconstrained
    nodes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIRICHLET = "dirichlet"
PERIODIC = "periodic"

#: marker in DofMap.node_to_dof for nodes eliminated by the boundary condition
CONSTRAINED = -1


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class StructuredGrid2D:
    """Uniform n-by-n mesh of [0,1]^2.

    Immutable after construction; safe to share between threads.
    """

    def __init__(self, n: int, boundary_kind: str = DIRICHLET):
        if not isinstance(n, (int, np.integer)) or n < 2 or not _is_power_of_two(int(n)):
            raise ValueError(f"cells per side must be a power of two >= 2, got {n!r}")
        if boundary_kind not in (DIRICHLET, PERIODIC):
            raise ValueError(f"unknown boundary kind {boundary_kind!r}")
        n = int(n)
        self.n = n
        self.h = 1.0 / n
        self.boundary_kind = boundary_kind
        self.node_count = (n + 1) ** 2
        self.element_count = n * n

        idx = np.arange(n + 1)
        # lexicographic node coordinates, x fastest
        self.node_i = np.tile(idx, n + 1)
        self.node_j = np.repeat(idx, n + 1)
        self.node_x = self.node_i * self.h
        self.node_y = self.node_j * self.h

        # counterclockwise corner nodes of each element
        e0 = np.tile(np.arange(n), n) + np.repeat(np.arange(n), n) * (n + 1)
        self.elements = np.stack([e0, e0 + 1, e0 + n + 2, e0 + n + 1], axis=1)

    def node_index(self, i, j):
        return np.asarray(i) + np.asarray(j) * (self.n + 1)

    @property
    def boundary_mask(self) -> np.ndarray:
        i, j, n = self.node_i, self.node_j, self.n
        return (i == 0) | (i == n) | (j == 0) | (j == n)

    def element_origins(self):
        """Lower-left corner coordinates of every element, shape (E,), (E,)."""
        ex = np.tile(np.arange(self.n), self.n)
        ey = np.repeat(np.arange(self.n), self.n)
        return ex * self.h, ey * self.h

    def __repr__(self):
        return f"StructuredGrid2D(n={self.n}, boundary_kind={self.boundary_kind!r})"


@dataclass(frozen=True)
class DofMap:
    """Map between mesh nodes and unknowns of a linear system.

    kind "interior_only" eliminates the Dirichlet boundary, leaving
    (n-1)^2 dofs; "periodic_zero_mean" identifies wrapped nodes with their
    representative in [0,n)^2, leaving n^2 dofs (the zero-mean constraint is
    applied at solve time); "all" keeps every node.
    """

    kind: str
    total_dofs: int
    node_to_dof: np.ndarray  # (node_count,), CONSTRAINED where eliminated
    dof_to_node: np.ndarray  # (total_dofs,), representative node per dof


def interior_dof_map(grid: StructuredGrid2D) -> DofMap:
    n = grid.n
    node_to_dof = np.full(grid.node_count, CONSTRAINED, dtype=np.int64)
    interior = ~grid.boundary_mask
    node_to_dof[interior] = np.arange(interior.sum())
    return DofMap("interior_only", int(interior.sum()), node_to_dof,
                  np.flatnonzero(interior))


def periodic_dof_map(grid: StructuredGrid2D) -> DofMap:
    n = grid.n
    i = grid.node_i % n
    j = grid.node_j % n
    node_to_dof = (i + j * n).astype(np.int64)
    rep_i = np.tile(np.arange(n), n)
    rep_j = np.repeat(np.arange(n), n)
    dof_to_node = rep_i + rep_j * (n + 1)
    return DofMap("periodic_zero_mean", n * n, node_to_dof, dof_to_node)


def full_dof_map(grid: StructuredGrid2D) -> DofMap:
    idx = np.arange(grid.node_count, dtype=np.int64)
    return DofMap("all", grid.node_count, idx.copy(), idx)


def dof_map_for(grid: StructuredGrid2D) -> DofMap:
    """Natural dof map for the grid's boundary kind."""
    if grid.boundary_kind == PERIODIC:
        return periodic_dof_map(grid)
    return interior_dof_map(grid)


def make_grid(n: int, boundary_kind: str = DIRICHLET) -> StructuredGrid2D:
    """Build a grid, rejecting n < 2 and non-power-of-two n."""
    return StructuredGrid2D(n, boundary_kind)


def periodic_wrap(x):
    """Componentwise fractional part mapped into [0,1).

    Negative inputs wrap upward.  np.mod may round results up to exactly
    1.0 for tiny negative inputs; those are folded back to 0.0.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("periodic_wrap requires finite coordinates")
    r = np.mod(x, 1.0)
    return np.where(r >= 1.0, 0.0, r)
