"""Uniform rectangular meshes on the closed unit square and two-component grid functions.

Grids are stored column-major by the x index i, so ``values[alpha, i, :]`` is one
vertical line of component ``alpha``. All line solvers operate on such columns.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import MeshError, ShapeMismatchError

Scalar = float
BoundaryFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

GRID_CSV_HEADER = ("x", "y", "value")


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh with ``nx`` by ``ny`` cells; node (i, j) sits at (i*hx, j*hy).

    A node is a boundary node iff i is 0 or nx, or j is 0 or ny. Instances are
    immutable and safe to share across workers.
    """

    nx: int
    ny: int
    hx: float
    hy: float

    @property
    def shape(self) -> tuple[int, int]:
        """Node-array shape, (nx + 1, ny + 1)."""
        return (self.nx + 1, self.ny + 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nx + 1)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny + 1)

    def node_grids(self) -> tuple[np.ndarray, np.ndarray]:
        """Full coordinate arrays X, Y of shape (nx + 1, ny + 1), ij-indexed."""
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def is_boundary(self, i: int, j: int) -> bool:
        return i in (0, self.nx) or j in (0, self.ny)


def build_mesh(nx: int, ny: int) -> Mesh:
    """Build the uniform mesh with nx, ny cells per axis (each at least 2)."""
    if nx < 2 or ny < 2:
        raise MeshError(
            f"mesh needs at least 2 cells per axis to have an interior line, got ({nx}, {ny})"
        )
    return Mesh(nx=int(nx), ny=int(ny), hx=1.0 / nx, hy=1.0 / ny)


@dataclass(frozen=True)
class GridPair:
    """Two-component mesh function over all nodes, shape (2, nx + 1, ny + 1).

    Values are read-only after construction; build new instances to mutate.
    """

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        expected = (2,) + self.mesh.shape
        if vals.shape != expected:
            raise ShapeMismatchError(
                f"grid values have shape {vals.shape}, mesh expects {expected}"
            )
        if not np.all(np.isfinite(vals)):
            bad = np.argwhere(~np.isfinite(vals))[0]
            raise ValueError(f"non-finite grid value at component {bad[0]}, node ({bad[1]}, {bad[2]})")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "GridPair":
        return cls(mesh, np.zeros((2,) + mesh.shape))

    @classmethod
    def constant(cls, mesh: Mesh, k: tuple[Scalar, Scalar]) -> "GridPair":
        vals = np.empty((2,) + mesh.shape)
        vals[0] = k[0]
        vals[1] = k[1]
        return cls(mesh, vals)

    @classmethod
    def from_components(cls, mesh: Mesh, u1: np.ndarray, u2: np.ndarray) -> "GridPair":
        return cls(mesh, np.stack([u1, u2]))

    def component(self, alpha: int) -> np.ndarray:
        return self.values[alpha]

    def with_values(self, values: np.ndarray) -> "GridPair":
        return GridPair(self.mesh, values)


def _require_same_mesh(a: GridPair, b: GridPair) -> None:
    if a.mesh != b.mesh:
        raise ShapeMismatchError(
            f"grid pair meshes differ: ({a.mesh.nx}, {a.mesh.ny}) vs ({b.mesh.nx}, {b.mesh.ny})"
        )


def max_norm_diff(a: GridPair, b: GridPair) -> float:
    """Max over both components and all nodes of |a - b|."""
    _require_same_mesh(a, b)
    return float(np.max(np.abs(a.values - b.values)))


def pointwise_leq(a: GridPair, b: GridPair, slack: float = 0.0) -> bool:
    """True iff a <= b + slack at every node in both components."""
    _require_same_mesh(a, b)
    return bool(np.all(a.values <= b.values + slack))


def first_order_violation(low: np.ndarray, high: np.ndarray,
                          slack: float) -> tuple[int, int, int, float] | None:
    """Locate the worst node where ``low <= high + slack`` fails, if any.

    Returns (component, i, j, excess) or None when the ordering holds.
    """
    excess = low - high
    worst = float(np.max(excess))
    if worst <= slack:
        return None
    alpha, i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    return int(alpha), int(i), int(j), worst


def boundary_mask(mesh: Mesh) -> np.ndarray:
    """Boolean array over nodes, True on the boundary frame."""
    mask = np.zeros(mesh.shape, dtype=bool)
    mask[0, :] = mask[-1, :] = True
    mask[:, 0] = mask[:, -1] = True
    return mask


def sample_on_boundary(mesh: Mesh, fns: tuple[BoundaryFn, BoundaryFn]) -> np.ndarray:
    """Sample two boundary evaluators on the frame; interior entries are zero."""
    X, Y = mesh.node_grids()
    mask = boundary_mask(mesh)
    out = np.zeros((2,) + mesh.shape)
    for alpha, fn in enumerate(fns):
        vals = np.asarray(fn(X[mask], Y[mask]), dtype=float)
        vals = np.broadcast_to(vals, X[mask].shape)
        out[alpha][mask] = vals
    return out


def apply_boundary(values: np.ndarray, frame: np.ndarray) -> None:
    """Overwrite the frame entries of ``values`` with those of ``frame`` (in place)."""
    values[:, 0, :] = frame[:, 0, :]
    values[:, -1, :] = frame[:, -1, :]
    values[:, :, 0] = frame[:, :, 0]
    values[:, :, -1] = frame[:, :, -1]


def grid_function(mesh: Mesh, values: np.ndarray) -> BoundaryFn:
    """Wrap a node-value array as an (x, y) evaluator, exact at mesh nodes."""
    vals = np.asarray(values, dtype=float)
    if vals.shape != mesh.shape:
        raise ShapeMismatchError(f"grid function values {vals.shape} do not match mesh {mesh.shape}")

    def lookup(x, y):
        i = np.rint(np.asarray(x) * mesh.nx).astype(int)
        j = np.rint(np.asarray(y) * mesh.ny).astype(int)
        if np.any(np.abs(i * mesh.hx - x) > 1e-9) or np.any(np.abs(j * mesh.hy - y) > 1e-9):
            raise ShapeMismatchError("grid-backed evaluator queried off the mesh nodes")
        return vals[i, j]

    return lookup


def write_grid_csv(path: str | Path, mesh: Mesh, component_values: np.ndarray) -> None:
    """Write one component to CSV: header x,y,value; rows j-outer, i-inner; 17 digits."""
    vals = np.asarray(component_values)
    if vals.shape != mesh.shape:
        raise ShapeMismatchError(f"component shape {vals.shape} does not match mesh {mesh.shape}")
    xs, ys = mesh.xs, mesh.ys
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRID_CSV_HEADER)
        for j in range(mesh.ny + 1):
            for i in range(mesh.nx + 1):
                writer.writerow((f"{xs[i]:.17g}", f"{ys[j]:.17g}", f"{vals[i, j]:.17g}"))
