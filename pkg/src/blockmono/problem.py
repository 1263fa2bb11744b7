"""Problem definitions: diffusion, convection, quasimonotone reaction pairs, boundary data.

A problem couples two components u1, u2 through the reaction pair
(f1(x, y, u1, u2), f2(x, y, u1, u2)). On a working sector the reactions must be
quasimonotone nondecreasing (each f_a nonincreasing in the other component) and
their own-component slopes bounded above by user-supplied nonnegative functions
c_a(x, y). Those bounds feed the shifted operator

    Gamma_a(x, y, U) = c_a(x, y) * U_a - f_a(x, y, U),

which is monotone nondecreasing on the sector and drives every monotone-sequence
argument downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, EvaluationError, PreconditionError
from .mesh import GridPair, Mesh, pointwise_leq

ReactionFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
CoefficientFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

SIGN_CLASSES = ("nonnegative", "nonpositive", "mixed")

# Relative step and tolerance for sampled derivative checks.
DERIV_STEP = 1e-6
DERIV_TOL = 1e-6


def constant_fn(value: float) -> CoefficientFn:
    """Constant-in-space coefficient evaluator."""

    def fn(x, y):
        return np.full(np.shape(x), float(value))

    return fn


ZERO_FN = constant_fn(0.0)


def zero_reaction(x, y, u1, u2):
    return np.zeros(np.shape(u1))


@dataclass(frozen=True)
class ProblemSpec:
    """A solvable instance of the coupled convection-diffusion-reaction system.

    All evaluators must be pure, accept numpy arrays, and broadcast; the engine
    evaluates them many nodes at a time.
    """

    eps: tuple[float, float]
    convection: tuple[CoefficientFn, CoefficientFn]
    sign_class: tuple[str, str]
    reaction: tuple[ReactionFn, ReactionFn]
    cbound: tuple[CoefficientFn, CoefficientFn]
    boundary: tuple[CoefficientFn, CoefficientFn]

    def __post_init__(self):
        if len(self.eps) != 2 or any(e <= 0 for e in self.eps):
            raise ConfigError(f"diffusion constants must be positive, got {self.eps}")
        for cls in self.sign_class:
            if cls not in SIGN_CLASSES:
                raise ConfigError(f"unknown convection sign class {cls!r}, expected one of {SIGN_CLASSES}")


def _eval_coefficient(fn: CoefficientFn, X: np.ndarray, Y: np.ndarray,
                      what: str, alpha: int) -> np.ndarray:
    vals = np.asarray(fn(X, Y), dtype=float)
    vals = np.broadcast_to(vals, X.shape).copy()
    if not np.all(np.isfinite(vals)):
        i, j = np.argwhere(~np.isfinite(vals))[0][:2]
        raise EvaluationError(f"{what} evaluator {alpha + 1} returned a non-finite value "
                              f"at node ({i}, {j})", node=(int(i), int(j)), component=alpha)
    return vals


def sample_convection(p: ProblemSpec, mesh: Mesh) -> np.ndarray:
    """Convection samples at every node, shape (2, nx + 1, ny + 1)."""
    X, Y = mesh.node_grids()
    return np.stack([_eval_coefficient(p.convection[a], X, Y, "convection", a) for a in (0, 1)])


def sample_cbound(p: ProblemSpec, mesh: Mesh) -> GridPair:
    """Reaction-derivative bounds c_a at every node; must be nonnegative."""
    X, Y = mesh.node_grids()
    c = np.stack([_eval_coefficient(p.cbound[a], X, Y, "c-bound", a) for a in (0, 1)])
    if np.any(c < 0):
        nodes = [(int(i), int(j)) for _, i, j in np.argwhere(c < 0)[:8]]
        raise PreconditionError(f"c-bound must be nonnegative at every node; negative at {nodes}", nodes)
    return GridPair(mesh, c)


def validate_on_mesh(p: ProblemSpec, mesh: Mesh) -> None:
    """Check the mesh-sampled invariants: c >= 0 and sign classes match v samples."""
    sample_cbound(p, mesh)
    v = sample_convection(p, mesh)
    for alpha in (0, 1):
        cls = p.sign_class[alpha]
        if cls == "nonnegative" and v[alpha].min() < 0:
            raise PreconditionError(
                f"convection {alpha + 1} declared nonnegative but sampled minimum is {v[alpha].min():g}")
        if cls == "nonpositive" and v[alpha].max() > 0:
            raise PreconditionError(
                f"convection {alpha + 1} declared nonpositive but sampled maximum is {v[alpha].max():g}")


def evaluate_reaction(p: ProblemSpec, X: np.ndarray, Y: np.ndarray,
                      u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """Evaluate both reaction components; raises on non-finite output."""
    out = np.empty((2,) + np.shape(u1))
    for alpha in (0, 1):
        vals = np.asarray(p.reaction[alpha](X, Y, u1, u2), dtype=float)
        out[alpha] = np.broadcast_to(vals, np.shape(u1))
    if not np.all(np.isfinite(out)):
        idx = np.argwhere(~np.isfinite(out))[0]
        alpha, rest = int(idx[0]), tuple(int(k) for k in idx[1:])
        raise EvaluationError(f"reaction evaluator {alpha + 1} returned a non-finite value at index {rest}",
                              node=rest if len(rest) == 2 else None, component=alpha)
    return out


def gamma(p: ProblemSpec, u: GridPair) -> GridPair:
    """The shifted reaction Gamma_a(U) = c_a * U_a - f_a(U) at every node."""
    mesh = u.mesh
    X, Y = mesh.node_grids()
    c = sample_cbound(p, mesh).values
    f = evaluate_reaction(p, X, Y, u.values[0], u.values[1])
    return GridPair(mesh, c * u.values - f)


@dataclass(frozen=True)
class SectorSample:
    """An ordered pair of grids delimiting the working sector."""

    lower: GridPair
    upper: GridPair

    def __post_init__(self):
        if not pointwise_leq(self.lower, self.upper, 0.0):
            raise PreconditionError("sector lower bound exceeds upper bound somewhere")


@dataclass(frozen=True)
class SectorViolation:
    kind: str  # "self-derivative-bound" or "cross-derivative-sign"
    component: int
    node: tuple[int, int]
    value: float
    bound: float
    at_u: tuple[float, float]


@dataclass(frozen=True)
class SectorReport:
    passed: bool
    violations: tuple[SectorViolation, ...]
    samples_per_node: int

    def __str__(self):
        if self.passed:
            return f"sector conditions hold at {self.samples_per_node}^2 samples per node"
        head = "; ".join(
            f"{v.kind} comp {v.component + 1} node {v.node} value {v.value:.3e} bound {v.bound:.3e}"
            for v in self.violations[:5])
        return f"{len(self.violations)} sector violations: {head}"


def check_sector_conditions(p: ProblemSpec, s: SectorSample,
                            samples_per_node: int = 3) -> SectorReport:
    """Sample the sector and finite-difference the reactions against the declared bounds.

    At every node and for a lattice of u values between the sector bounds,
    estimates d f_a / d u_a (must stay below c_a) and d f_a / d u_other (must be
    nonpositive, the quasimonotone nondecreasing condition).
    """
    if samples_per_node < 2:
        raise ConfigError("samples_per_node must be at least 2")
    mesh = s.lower.mesh
    X, Y = mesh.node_grids()
    c = sample_cbound(p, mesh).values
    lo, hi = s.lower.values, s.upper.values
    fractions = np.linspace(0.0, 1.0, samples_per_node)

    violations: list[SectorViolation] = []
    for t1 in fractions:
        for t2 in fractions:
            u1 = lo[0] + t1 * (hi[0] - lo[0])
            u2 = lo[1] + t2 * (hi[1] - lo[1])
            d1 = DERIV_STEP * (1.0 + np.abs(u1))
            d2 = DERIV_STEP * (1.0 + np.abs(u2))
            for alpha, f in enumerate(p.reaction):
                own, other = (u1, u2) if alpha == 0 else (u2, u1)
                d_own, d_cross = (d1, d2) if alpha == 0 else (d2, d1)

                def f_of(a, b):
                    return np.asarray(f(X, Y, a, b) if alpha == 0 else f(X, Y, b, a), dtype=float)

                slope_own = (f_of(own + d_own, other) - f_of(own - d_own, other)) / (2 * d_own)
                slope_cross = (f_of(own, other + d_cross) - f_of(own, other - d_cross)) / (2 * d_cross)

                bad = slope_own > c[alpha] + DERIV_TOL
                for i, j in np.argwhere(bad)[:4]:
                    violations.append(SectorViolation(
                        "self-derivative-bound", alpha, (int(i), int(j)),
                        float(slope_own[i, j]), float(c[alpha, i, j]),
                        (float(u1[i, j]), float(u2[i, j]))))
                bad = slope_cross > DERIV_TOL
                for i, j in np.argwhere(bad)[:4]:
                    violations.append(SectorViolation(
                        "cross-derivative-sign", alpha, (int(i), int(j)),
                        float(slope_cross[i, j]), 0.0,
                        (float(u1[i, j]), float(u2[i, j]))))
    return SectorReport(passed=not violations, violations=tuple(violations),
                        samples_per_node=samples_per_node)


def linear_problem(eps: tuple[float, float] = (1.0, 1.0),
                   v: tuple[float, float] = (0.0, 0.0),
                   boundary: tuple[CoefficientFn, CoefficientFn] = (ZERO_FN, ZERO_FN),
                   ) -> ProblemSpec:
    """Pure convection-diffusion instance: f = 0, c = 0, constant convection."""

    def classify(a: float) -> str:
        return "nonnegative" if a >= 0 else "nonpositive"

    return ProblemSpec(
        eps=tuple(float(e) for e in eps),
        convection=(constant_fn(v[0]), constant_fn(v[1])),
        sign_class=(classify(v[0]), classify(v[1])),
        reaction=(zero_reaction, zero_reaction),
        cbound=(ZERO_FN, ZERO_FN),
        boundary=boundary,
    )


@dataclass(frozen=True)
class Model:
    """A registry-built model: the problem plus any precomputed initial data."""

    name: str
    problem: ProblemSpec
    initial_pair: "tuple[GridPair, GridPair] | None" = None
    gas_liquid: "object | None" = None  # GasLiquidParams for the gas-liquid model


def _build_linear(mesh: Mesh, params: dict) -> Model:
    eps = tuple(params.get("eps", (1.0, 1.0)))
    v = tuple(params.get("v", (0.0, 0.0)))
    g = params.get("g", (ZERO_FN, ZERO_FN))
    known = {"eps", "v", "g"}
    extra = set(params) - known
    if extra:
        raise ConfigError(f"unknown linear-model parameters: {sorted(extra)}")
    return Model("linear", linear_problem(eps=eps, v=v, boundary=tuple(g)))


def _build_gas_liquid(mesh: Mesh, params: dict) -> Model:
    from .initials import GasLiquidParams, gas_liquid_problem

    known = {"sigma1", "k1", "rho1", "eps", "g1star", "g2"}
    extra = set(params) - known
    if extra:
        raise ConfigError(f"unknown gas-liquid parameters: {sorted(extra)}")
    gp = GasLiquidParams(
        sigma1=float(params.get("sigma1", 1.0)),
        k1=float(params.get("k1", 1.0)),
        rho1=float(params.get("rho1", 1.0)),
        eps=tuple(params.get("eps", (1.0, 1.0))),
        g1star=params.get("g1star", ZERO_FN),
        g2=params.get("g2", constant_fn(1.0)),
    )
    spec, lower, upper = gas_liquid_problem(gp, mesh)
    return Model("gas-liquid", spec, initial_pair=(lower, upper), gas_liquid=gp)


MODEL_BUILDERS = {
    "linear": _build_linear,
    "gas-liquid": _build_gas_liquid,
}


def build_model(name: str, mesh: Mesh, params: dict | None = None) -> Model:
    """Instantiate a registered model on a mesh. Custom models go through ProblemSpec."""
    try:
        builder = MODEL_BUILDERS[name]
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; registered: {sorted(MODEL_BUILDERS)}") from None
    return builder(mesh, dict(params or {}))
