"""Linear Dirichlet solves for the 5-point Laplacian.

One sparse LU factorization per grid, reused across the many right-hand
sides an outer iteration produces. Solves are deterministic: identical
inputs give bitwise-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .domain import BoundarySpec, Grid, GridField
from .errors import NoConvergence, SingularSystem


@dataclass(frozen=True)
class LinearSolveConfig:
    """residual_tol = None means the default 1e-10 * (1 + sup|f|)."""

    residual_tol: float | None = None
    max_inner_iters: int = 10_000
    reuse_factorization: bool = True

    def __post_init__(self):
        if self.residual_tol is not None and self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")


def _neg_laplacian_matrix(grid: Grid) -> sparse.csc_matrix:
    """-laplacian on interior nodes, x-major ordering, SPD M-matrix."""
    mx, my = grid.nx - 2, grid.ny - 2
    h2 = grid.h * grid.h

    def tridiag(m):
        return sparse.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(m, m))

    a = sparse.kron(tridiag(mx), sparse.identity(my)) + sparse.kron(
        sparse.identity(mx), tridiag(my)
    )
    return (a / h2).tocsc()


class PoissonSolver:
    """Dirichlet solver bound to one grid, with a cached factorization.

    Single-owner: share grids and fields freely, but give each concurrent
    task its own solver instance.
    """

    def __init__(self, grid: Grid, cfg: LinearSolveConfig | None = None):
        self.grid = grid
        self.cfg = cfg or LinearSolveConfig()
        self._lu = None

    def _factorization(self):
        if self._lu is None or not self.cfg.reuse_factorization:
            try:
                self._lu = splu(_neg_laplacian_matrix(self.grid))
            except RuntimeError as exc:  # pragma: no cover - cannot occur for this matrix
                raise SingularSystem(str(exc)) from exc
        return self._lu

    def solve(self, f: GridField, bc: BoundarySpec | None = None) -> GridField:
        """u with laplacian(u) = f inside and u = bc on the boundary."""
        grid = self.grid
        if f.grid.shape != grid.shape:
            raise ValueError("right-hand side lives on a different grid")
        bc = bc or BoundarySpec.homogeneous()
        bvals = bc.values_on(grid)
        h2 = grid.h * grid.h

        # boundary neighbours of each interior node enter the right-hand side
        contrib = (
            bvals[:-2, 1:-1] + bvals[2:, 1:-1] + bvals[1:-1, :-2] + bvals[1:-1, 2:]
        ) / h2
        rhs = (-f.values[1:-1, 1:-1] + contrib).ravel()

        lu = self._factorization()
        sol = lu.solve(rhs)

        out = bvals.copy()
        out[1:-1, 1:-1] = sol.reshape(grid.nx - 2, grid.ny - 2)

        tol = self.cfg.residual_tol
        if tol is None:
            tol = 1e-10 * (1.0 + float(np.max(np.abs(f.values))))
        res = self._interior_residual(out, f.values)
        if res > tol:
            raise NoConvergence(
                f"direct solve residual {res:.3e} exceeds tolerance {tol:.3e}", residual=res
            )
        return grid.field(out)

    def _interior_residual(self, u: np.ndarray, f: np.ndarray) -> float:
        h2 = self.grid.h * self.grid.h
        lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / h2
        return float(np.max(np.abs(lap - f[1:-1, 1:-1])))


def solve_dirichlet(
    grid: Grid, f: GridField, bc: BoundarySpec | None = None, cfg: LinearSolveConfig | None = None
) -> GridField:
    """One-shot Dirichlet solve (factorization not kept)."""
    return PoissonSolver(grid, cfg).solve(f, bc)


def lift_boundary(
    grid: Grid, bc: BoundarySpec, h_rhs: GridField, cfg: LinearSolveConfig | None = None
) -> GridField:
    """Starting iterate for nonhomogeneous problems: laplacian(u0) = h, u0 = phi."""
    return solve_dirichlet(grid, h_rhs, bc, cfg)
