"""Upwinded five-point discretization and its block-tridiagonal form.

At an interior node the scheme reads

    d*U_ij - l*U_(i-1)j - r*U_(i+1)j - b*U_i(j-1) - t*U_i(j+1) + f(x, y, U) = 0,

with the convection term one-sided against the flow so every off-diagonal
coefficient stays nonnegative and d = l + r + b + t exactly. Grouping one
vertical line at a time gives, per interior column i, a tridiagonal matrix A_i
(diagonal d, couplings -b, -t), diagonal neighbor couplings L_i (entries l) and
R_i (entries r), and a boundary load G* folded from the Dirichlet data. The
strictly diagonally dominant A_i with nonpositive off-diagonals are M-matrices,
which is what makes line solves sign-preserving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError, ShapeMismatchError
from .mesh import BoundaryFn, GridPair, Mesh, sample_on_boundary
from .problem import ProblemSpec, evaluate_reaction, sample_convection


@dataclass(frozen=True)
class StencilCoefficients:
    """Per-node, per-component stencil weights; meaningful at interior nodes only.

    Arrays have shape (2, nx + 1, ny + 1) with zeros on the frame. ``v_min`` and
    ``v_max`` record the sampled convection range per component, used to decide
    admissible Gauss-Seidel sweep directions.
    """

    mesh: Mesh
    l: np.ndarray
    r: np.ndarray
    b: np.ndarray
    t: np.ndarray
    d: np.ndarray
    v_min: tuple[float, float]
    v_max: tuple[float, float]

    def column_bands(self, cdiag: np.ndarray | None = None
                     ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Tridiagonal bands for all interior columns at once.

        Returns (sub, diag, sup), each of shape (2, nx - 1, ny - 1); the first
        sub and last sup entries of each column are unused. ``cdiag`` adds a
        nonnegative diagonal shift (same full-grid shape as the coefficients).
        """
        inner = (slice(None), slice(1, -1), slice(1, -1))
        sub = -self.b[inner]
        sup = -self.t[inner]
        diag = self.d[inner].copy()
        if cdiag is not None:
            diag += cdiag[inner]
        return sub, diag, sup


def assemble_stencil(mesh: Mesh, p: ProblemSpec) -> StencilCoefficients:
    """Upwind coefficients: the convection weight joins l, b when v >= 0 (backward
    differencing) and r, t when v < 0 (forward differencing), node by node."""
    v = sample_convection(p, mesh)
    if not np.all(np.isfinite(v)):
        alpha, i, j = np.argwhere(~np.isfinite(v))[0]
        raise EvaluationError(f"convection {alpha + 1} non-finite at node ({i}, {j})",
                              node=(int(i), int(j)), component=int(alpha))
    vpos = np.maximum(v, 0.0)
    vneg = np.maximum(-v, 0.0)

    shape = (2,) + mesh.shape
    l = np.zeros(shape)
    r = np.zeros(shape)
    b = np.zeros(shape)
    t = np.zeros(shape)
    inner = (slice(None), slice(1, -1), slice(1, -1))
    eps = np.asarray(p.eps, dtype=float).reshape(2, 1, 1)
    l[inner] = eps / mesh.hx**2 + vpos[inner] / mesh.hx
    r[inner] = eps / mesh.hx**2 + vneg[inner] / mesh.hx
    b[inner] = eps / mesh.hy**2 + vpos[inner] / mesh.hy
    t[inner] = eps / mesh.hy**2 + vneg[inner] / mesh.hy
    d = l + r + b + t
    return StencilCoefficients(
        mesh, l, r, b, t, d,
        v_min=(float(v[0].min()), float(v[1].min())),
        v_max=(float(v[0].max()), float(v[1].max())),
    )


@dataclass(frozen=True)
class BlockSystem:
    """The line-blocked difference system: stencil, folded boundary load, boundary trace.

    ``gstar`` holds, at each interior node, the Dirichlet contributions of any
    stencil neighbor falling on the boundary (the left column fold at i = 1, the
    right fold at i = nx - 1, and the bottom/top row folds at j = 1, ny - 1).
    ``gframe`` carries the sampled boundary data on the frame, zero inside.
    Instances are immutable and shareable.
    """

    mesh: Mesh
    coeffs: StencilCoefficients
    gstar: np.ndarray
    gframe: np.ndarray

    @property
    def gstar_norm(self) -> float:
        return float(np.max(np.abs(self.gstar)))


def _fold_boundary_load(coeffs: StencilCoefficients, gframe: np.ndarray) -> np.ndarray:
    mesh = coeffs.mesh
    gstar = np.zeros_like(gframe)
    gstar[:, 1, 1:-1] += coeffs.l[:, 1, 1:-1] * gframe[:, 0, 1:-1]
    gstar[:, -2, 1:-1] += coeffs.r[:, -2, 1:-1] * gframe[:, -1, 1:-1]
    gstar[:, 1:-1, 1] += coeffs.b[:, 1:-1, 1] * gframe[:, 1:-1, 0]
    gstar[:, 1:-1, -2] += coeffs.t[:, 1:-1, -2] * gframe[:, 1:-1, -1]
    return gstar


def assemble_block_system(mesh: Mesh, coeffs: StencilCoefficients,
                          g: tuple[BoundaryFn, BoundaryFn]) -> BlockSystem:
    """Fold the boundary evaluators into the load vector and freeze the system."""
    if coeffs.mesh != mesh:
        raise ShapeMismatchError("stencil coefficients were assembled on a different mesh")
    gframe = sample_on_boundary(mesh, g)
    gstar = _fold_boundary_load(coeffs, gframe)
    for arr in (gstar, gframe):
        arr.setflags(write=False)
    return BlockSystem(mesh, coeffs, gstar, gframe)


def with_boundary(sys: BlockSystem, g: tuple[BoundaryFn, BoundaryFn]) -> BlockSystem:
    """Same stencil, different Dirichlet data."""
    return assemble_block_system(sys.mesh, sys.coeffs, g)


def apply_operator(coeffs: StencilCoefficients, values: np.ndarray) -> np.ndarray:
    """Five-point operator applied to a full grid, reading the grid's own frame.

    Returns interior-node values of shape (2, nx - 1, ny - 1).
    """
    c = coeffs
    center = values[:, 1:-1, 1:-1]
    west = values[:, :-2, 1:-1]
    east = values[:, 2:, 1:-1]
    south = values[:, 1:-1, :-2]
    north = values[:, 1:-1, 2:]
    inner = (slice(None), slice(1, -1), slice(1, -1))
    return (c.d[inner] * center - c.l[inner] * west - c.r[inner] * east
            - c.b[inner] * south - c.t[inner] * north)


def residual(sys: BlockSystem, p: ProblemSpec, u: GridPair) -> np.ndarray:
    """Residual K of the difference equations on u, per interior node.

    Neighbor values, including those on the frame, are read from u itself, so
    for an iterate carrying the Dirichlet data this is exactly
    A_i u_i - L_i u_(i-1) - R_i u_(i+1) + F_i(u) - G*_i; for arbitrary frame
    values it is the defect that defines discrete upper (K >= 0) and lower
    (K <= 0) solutions. Shape (2, nx + 1, ny + 1), zero on the frame.
    """
    mesh = sys.mesh
    if u.mesh != mesh:
        raise ShapeMismatchError("iterate lives on a different mesh than the system")
    X, Y = mesh.node_grids()
    inner = (slice(1, -1), slice(1, -1))
    f = evaluate_reaction(p, X[inner], Y[inner],
                          u.values[0][inner], u.values[1][inner])
    out = np.zeros_like(u.values)
    out[:, 1:-1, 1:-1] = apply_operator(sys.coeffs, u.values) + f
    return out


@dataclass(frozen=True)
class OrderedPairReport:
    """Outcome of checking a candidate upper/lower solution pair."""

    passed: bool
    ordering_failures: tuple[tuple[int, int, int, float], ...]
    upper_residual_failures: tuple[tuple[int, int, int, float], ...]
    lower_residual_failures: tuple[tuple[int, int, int, float], ...]
    boundary_failures: tuple[tuple[int, int, int, float], ...]
    slack: float

    def __str__(self):
        if self.passed:
            return f"ordered upper/lower pair verified (slack {self.slack:g})"
        parts = []
        for label, fails in (("ordering", self.ordering_failures),
                             ("upper residual", self.upper_residual_failures),
                             ("lower residual", self.lower_residual_failures),
                             ("boundary", self.boundary_failures)):
            if fails:
                a, i, j, v = fails[0]
                parts.append(f"{label}: {len(fails)} nodes, worst comp {a + 1} "
                             f"({i}, {j}) by {v:.3e}")
        return "; ".join(parts)


def _collect(mask: np.ndarray, amounts: np.ndarray, limit: int = 16
             ) -> tuple[tuple[int, int, int, float], ...]:
    idx = np.argwhere(mask)
    if idx.size == 0:
        return ()
    order = np.argsort(-amounts[mask])
    picked = idx[order[:limit]]
    return tuple((int(a), int(i), int(j), float(amounts[a, i, j])) for a, i, j in picked)


def default_residual_slack(sys: BlockSystem) -> float:
    """Roundoff allowance for residual sign checks."""
    return 1e-10 * (1.0 + sys.gstar_norm)


def verify_ordered_pair(sys: BlockSystem, p: ProblemSpec, lower: GridPair,
                        upper: GridPair, slack: float | None = None) -> OrderedPairReport:
    """Check lower <= upper, residual signs, and lower <= g <= upper on the frame."""
    if slack is None:
        slack = default_residual_slack(sys)
    ordering = _collect(lower.values > upper.values + slack, lower.values - upper.values)

    k_upper = residual(sys, p, upper)
    k_lower = residual(sys, p, lower)
    up_fail = _collect(k_upper < -slack, -k_upper)
    low_fail = _collect(k_lower > slack, k_lower)

    from .mesh import boundary_mask

    mask = boundary_mask(sys.mesh)
    frame = sys.gframe
    below = (lower.values - frame) * mask  # lower must sit at or under g
    above = (frame - upper.values) * mask  # upper must sit at or over g
    boundary = _collect((below > slack) | (above > slack), np.maximum(below, above))

    passed = not (ordering or up_fail or low_fail or boundary)
    return OrderedPairReport(passed, ordering, up_fail, low_fail, boundary, slack)
