"""Temporal stability of a steady state and the closed-form sufficient conditions.

Two unrelated triples share the letters A, B, C: the auxiliary constants of the
local analysis (``TemporalStabilityReport``) and the quadratic coefficients of
the a priori bound on v (``AprioriBounds``). They live in separate types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ecoepi.equilibria import Equilibrium
from ecoepi.errors import ValidationError
from ecoepi.model import Jacobian3, jacobian_at
from ecoepi.params import ModelParams


@dataclass(frozen=True)
class TemporalStabilityReport:
    A1: float
    A2: float
    A3: float
    hurwitz_product: float
    stable: bool
    A: float
    B: float
    C: float
    M1: float
    M2: float
    E1: float
    D1: float
    P1: float


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a set of sufficient inequalities.

    ``checks`` maps inequality name to truth value and ``sides`` to the
    (left, right) values that were compared.
    """

    holds: bool
    checks: dict[str, bool]
    sides: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class AprioriBounds:
    u_max: float
    v_max: float
    w_max: float
    A: float
    B: float
    C: float
    valid: bool
    diagnostic: str = ""


def _require_feasible(eq: Equilibrium):
    if not eq.feasible:
        raise ValidationError(f"equilibrium {eq.state} is not feasible")


def auxiliary_constants(eq: Equilibrium, params: ModelParams) -> dict[str, float]:
    p = params
    u, v, w = eq.state
    s = p.sigma
    A = p.alpha1 * v + p.alpha2 * w
    B = p.gamma + u
    C = p.alpha * A / B - p.alpha * A * u / B**2
    D1 = p.alpha * p.alpha1 * u / B + p.c1 * s * (2 * p.beta * v + w) + p.c2 * s * p.beta * w
    M1 = s * (2 * p.beta * v + w) + s * p.l * p.f * w + p.lam * w + p.d
    E1 = p.alpha * p.alpha2 * u / B + p.c1 * s * v + p.c2 * s * (p.beta * v + 2 * w)
    M2 = s * v + s * p.l * p.f * v + p.lam * v
    P1 = p.transmission_excess
    return dict(A=A, B=B, C=C, M1=M1, M2=M2, E1=E1, D1=D1, P1=P1)


def routh_hurwitz(jac: Jacobian3) -> tuple[float, float, float, float, bool]:
    """Characteristic coefficients of xi^3 + A1 xi^2 + A2 xi + A3 and the verdict."""
    A1 = -jac.trace
    A2 = jac.principal_minor_sum
    A3 = -jac.det
    hp = A1 * A2 - A3
    return A1, A2, A3, hp, (A1 > 0 and A2 > 0 and A3 > 0 and hp > 0)


def temporal_stability(eq: Equilibrium, params: ModelParams) -> TemporalStabilityReport:
    _require_feasible(eq)
    A1, A2, A3, hp, stable = routh_hurwitz(jacobian_at(eq.state, params))
    return TemporalStabilityReport(A1, A2, A3, hp, stable, **auxiliary_constants(eq, params))


def check_local_stability_conditions(eq: Equilibrium, params: ModelParams) -> ConditionReport:
    """Sufficient conditions for local asymptotic stability of the diffusive system."""
    _require_feasible(eq)
    c = auxiliary_constants(eq, params)
    u, _, w = eq.state
    s = params.sigma
    gap = c["M1"] - c["D1"]
    slope = params.r / params.k - c["A"] / c["B"] ** 2
    checks = {
        "M1 > D1": c["M1"] > c["D1"],
        "M2 > E1": c["M2"] > c["E1"],
        "r/k > A/B^2": slope > 0,
    }
    sides = {
        "M1 > D1": (c["M1"], c["D1"]),
        "M2 > E1": (c["M2"], c["E1"]),
        "r/k > A/B^2": (params.r / params.k, c["A"] / c["B"] ** 2),
    }
    candidates = [1.0 / w]
    denom = gap + s * w
    candidates.append(s / denom if denom != 0 else math.inf)
    disc = gap**2 + 4.0 * slope * s
    if slope != 0 and disc >= 0:
        candidates.append((-gap + math.sqrt(disc)) / (2.0 * slope))
    else:
        candidates.append(math.inf)
    bound = max(candidates)
    checks["u* > max bound"] = u > bound
    sides["u* > max bound"] = (u, bound)
    return ConditionReport(all(checks.values()), checks, sides)


def check_global_stability_conditions(eq: Equilibrium, params: ModelParams,
                                      w_prime: float | None = None) -> ConditionReport:
    """Sufficient conditions for global asymptotic stability.

    ``w_prime`` is an upper bound on w; defaults to ``a_priori_bounds(params).w_max``.
    """
    _require_feasible(eq)
    if w_prime is None:
        w_prime = a_priori_bounds(params).w_max
    if w_prime < 0:
        raise ValidationError(f"w_prime must be >= 0, got {w_prime}", key="w_prime")
    p = params
    u, v, w = eq.state
    s = p.sigma
    shared = p.alpha * p.gamma * (p.alpha1 + p.alpha2 * w) / (2.0 * (p.gamma + u))
    lhs1 = (p.alpha1 * v + p.alpha2 * w) / (p.gamma + u) + shared
    rhs1 = p.r / p.k
    lhs2 = shared + p.c2 * s * (w_prime + w + p.beta) + p.alpha * p.alpha2 * p.k
    rhs2 = s * p.beta + s * (1.0 - p.c1)
    checks = {"prey": lhs1 <= rhs1, "predator": lhs2 <= rhs2}
    sides = {"prey": (lhs1, rhs1), "predator": (lhs2, rhs2)}
    return ConditionReport(all(checks.values()), checks, sides)


def a_priori_bounds(params: ModelParams) -> AprioriBounds:
    """Upper bounds for any positive steady state of the diffusive system."""
    p = params
    s = p.sigma
    if s <= 0:
        raise ValidationError("a priori bounds need sigma > 0", key="sigma")
    P = p.transmission_excess
    de = p.d + p.e
    sat = p.k / (p.gamma + p.k)
    A = ((1 - p.c1) * s * p.beta - p.c2 / s * P**2
         + P / s * (s + s * p.l * p.f + p.lam - p.c1 * s - p.c2 * s * p.beta))
    B = (-p.alpha * p.alpha1 * sat + P / s * (2 * p.c2 * de - p.alpha * p.alpha2 * sat)
         + de * (p.c1 * s + p.c2 * s * p.beta - s - s * p.l * p.f - p.lam))
    C = de / s * (p.alpha * p.alpha2 * sat - p.c2 * de)
    problems = []
    if not A > 0:
        problems.append("A <= 0")
    if not B < 0:
        problems.append("B >= 0")
    disc = B * B - 4 * A * C
    if not disc > 0:
        problems.append("B^2 - 4AC <= 0")
    if A > 0 and disc >= 0:
        v_max = (-B + math.sqrt(disc)) / (2 * A)
    else:
        v_max = math.nan
    w_max = (P * v_max - de) / s
    if P <= 0:
        problems.append("lambda + sigma*l*f - sigma*beta <= 0: w bound negative")
    elif w_max < 0:
        problems.append("w bound negative")
    return AprioriBounds(p.k, v_max, w_max, A, B, C, not problems, "; ".join(problems))
