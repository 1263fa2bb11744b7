"""Tridiagonal direct solves and the linear elliptic line-relaxation solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, ZeroPivotError
from .discretization import BlockSystem, with_boundary
from .mesh import BoundaryFn, GridPair, apply_boundary


@dataclass(frozen=True)
class Tridiagonal:
    """Bands of one tridiagonal matrix; sub[0] and sup[n - 1] are unused."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.sub) != n or len(self.sup) != n:
            raise ValueError("tridiagonal bands must share one length")

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[1:] += self.sub[1:] * x[:-1]
        y[:-1] += self.sup[:-1] * x[1:]
        return y

    def dense(self) -> np.ndarray:
        n = len(self.diag)
        m = np.diag(self.diag)
        m += np.diag(self.sub[1:], k=-1)
        m += np.diag(self.sup[: n - 1], k=1)
        return m


def thomas_solve_batch(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                       rhs: np.ndarray) -> np.ndarray:
    """Thomas elimination along the last axis, vectorized over leading axes.

    Bands follow the Tridiagonal convention. Diagonally dominant input is the
    caller's responsibility; a vanishing pivot raises (it cannot occur for
    systems produced by the assembler).
    """
    n = rhs.shape[-1]
    cp = np.zeros_like(rhs)
    dp = np.empty_like(rhs)
    pivot = diag[..., 0]
    if np.any(pivot == 0.0):
        raise ZeroPivotError("zero pivot in tridiagonal elimination at row 0")
    if n > 1:
        cp[..., 0] = sup[..., 0] / pivot
    dp[..., 0] = rhs[..., 0] / pivot
    for k in range(1, n):
        pivot = diag[..., k] - sub[..., k] * cp[..., k - 1]
        if np.any(pivot == 0.0):
            raise ZeroPivotError(f"zero pivot in tridiagonal elimination at row {k}")
        if k < n - 1:
            cp[..., k] = sup[..., k] / pivot
        dp[..., k] = (rhs[..., k] - sub[..., k] * dp[..., k - 1]) / pivot
    x = dp
    for k in range(n - 2, -1, -1):
        x[..., k] -= cp[..., k] * x[..., k + 1]
    return x


def thomas_solve(m: Tridiagonal, rhs: np.ndarray) -> np.ndarray:
    """Direct solve of one tridiagonal system."""
    rhs = np.asarray(rhs, dtype=float)
    return thomas_solve_batch(m.sub[None, :], m.diag[None, :], m.sup[None, :], rhs[None, :])[0]


def _as_pair_array(grid, sys: BlockSystem) -> np.ndarray:
    if grid is None:
        return np.zeros((2,) + sys.mesh.shape)
    if isinstance(grid, GridPair):
        return grid.values
    return np.asarray(grid, dtype=float)


def linear_residual(sys: BlockSystem, cstar: np.ndarray, phi: np.ndarray,
                    w: np.ndarray) -> np.ndarray:
    """Interior defect of the linear scheme on a grid whose frame carries g."""
    from .discretization import apply_operator

    inner = (slice(None), slice(1, -1), slice(1, -1))
    return apply_operator(sys.coeffs, w) + cstar[inner] * w[inner] - phi[inner]


def solve_linear(sys: BlockSystem, cstar=None, phi=None,
                 g: tuple[BoundaryFn, BoundaryFn] | None = None,
                 tol: float = 1e-12, max_iter: int | None = None) -> GridPair:
    """Solve the linear scheme (operator + c*) W = phi, W = g on the frame.

    Left-to-right block Gauss-Seidel line sweeps with Thomas solves; for the
    M-matrix systems produced by the assembler this always converges, and the
    sweep direction affects only the iteration count. Stops when every
    interior-node residual is at most ``tol``.
    """
    if g is not None:
        sys = with_boundary(sys, g)
    mesh = sys.mesh
    nx, ny = mesh.nx, mesh.ny
    if max_iter is None:
        max_iter = 100 * (nx + ny)

    C = _as_pair_array(cstar, sys)
    if np.any(C < 0):
        raise ValueError("c* must be nonnegative")
    PHI = _as_pair_array(phi, sys)

    w = np.zeros((2,) + mesh.shape)
    apply_boundary(w, sys.gframe)

    sub, diag, sup = sys.coeffs.column_bands(C)
    l = sys.coeffs.l
    r = sys.coeffs.r
    rhs_base = (PHI + sys.gstar)[:, 1:-1, 1:-1]

    res = np.inf
    for _ in range(max_iter):
        for i in range(1, nx):
            rhs = rhs_base[:, i - 1, :].copy()
            if i >= 2:
                rhs += l[:, i, 1:-1] * w[:, i - 1, 1:-1]
            if i <= nx - 2:
                rhs += r[:, i, 1:-1] * w[:, i + 1, 1:-1]
            w[:, i, 1:-1] = thomas_solve_batch(sub[:, i - 1], diag[:, i - 1], sup[:, i - 1], rhs)
        res = float(np.max(np.abs(linear_residual(sys, C, PHI, w))))
        if res <= tol:
            return GridPair(mesh, w)
    raise NonConvergenceError(
        f"linear line relaxation did not reach residual {tol:g} in {max_iter} sweeps "
        f"(final {res:g})", iterations=max_iter, final_residual=res)
