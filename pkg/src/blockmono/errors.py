"""Exception types raised by the solver library."""

from __future__ import annotations


class BlockmonoError(Exception):
    """Base class for all library errors."""


class ConfigError(BlockmonoError):
    """Malformed or inconsistent run configuration."""


class MeshError(BlockmonoError):
    """Mesh construction failure (for example, no interior line exists)."""


class ShapeMismatchError(BlockmonoError):
    """Grid functions defined on different meshes were combined."""


class EvaluationError(BlockmonoError):
    """A user-supplied evaluator produced a non-finite value.

    Carries the node location of the first offending value when known.
    """

    def __init__(self, message: str, node: tuple[int, int] | None = None,
                 component: int | None = None):
        super().__init__(message)
        self.node = node
        self.component = component


class PreconditionError(BlockmonoError):
    """A documented precondition failed; lists the offending nodes."""

    def __init__(self, message: str, nodes: list[tuple[int, int]] | None = None):
        super().__init__(message)
        self.nodes = nodes or []


class ZeroPivotError(BlockmonoError):
    """Tridiagonal elimination hit a zero pivot (assembly bug upstream)."""


class NonConvergenceError(BlockmonoError):
    """An iterative solve exhausted its iteration budget."""

    def __init__(self, message: str, iterations: int, final_residual: float):
        super().__init__(message)
        self.iterations = iterations
        self.final_residual = final_residual


class SweepDirectionError(BlockmonoError):
    """Requested Gauss-Seidel sweep direction is incompatible with the convection sign."""


class MonotonicityError(BlockmonoError):
    """A monotone step broke the ordering of the iterate sandwich.

    Signals a model whose derivative bound c is wrong for the sector.
    """

    def __init__(self, message: str, step: int, component: int,
                 node: tuple[int, int], amount: float):
        super().__init__(message)
        self.step = step
        self.component = component
        self.node = node
        self.amount = amount


class SandwichError(BlockmonoError):
    """The Jacobi/Gauss-Seidel comparison inequality failed at some step."""

    def __init__(self, message: str, step: int | None = None,
                 component: int | None = None,
                 node: tuple[int, int] | None = None):
        super().__init__(message)
        self.step = step
        self.component = component
        self.node = node


class OracleError(BlockmonoError):
    """Newton reference solve failed (singular Jacobian, size cap, stall)."""
