"""Constant positive steady states.

With sigma > 0 the third kinetic equation gives w = (P v - (d+e)) / sigma, where
P = lambda + sigma*l*f - sigma*beta. Substituting into the first two equations
leaves a pair in (u, v)::

    m1 u^2 + m2 u + m3 v + m4 = 0
    n1 v^2 + n2 u v/(gamma+u) + n3 v + n4 u/(gamma+u) + n5 = 0

The first is linear in v. Eliminating v and clearing (gamma+u) from the second
gives a quintic in u whose positive roots are bracketed on a uniform scan,
bisected and Newton-polished.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from ecoepi.errors import EquilibriumReductionError, NumericalError
from ecoepi.model import jacobian_at, kinetics
from ecoepi.params import ModelParams

RESIDUAL_TOL = 1e-10
SCAN_POINTS = 10_000
BISECT_TOL = 1e-12


@dataclass(frozen=True)
class ReducedEquilibriumSystem:
    m1: float
    m2: float
    m3: float
    m4: float
    n1: float
    n2: float
    n3: float
    n4: float
    n5: float

    def residuals(self, u: float, v: float, gamma: float) -> tuple[float, float]:
        s = u / (gamma + u)
        first = self.m1 * u * u + self.m2 * u + self.m3 * v + self.m4
        second = self.n1 * v * v + self.n2 * s * v + self.n3 * v + self.n4 * s + self.n5
        return first, second


@dataclass(frozen=True)
class Equilibrium:
    u_star: float
    v_star: float
    w_star: float
    residual_norm: float
    feasible: bool

    @property
    def state(self) -> tuple[float, float, float]:
        return (self.u_star, self.v_star, self.w_star)


def reduce_equilibrium_system(params: ModelParams, uncorrected: bool = False) -> ReducedEquilibriumSystem:
    """Coefficients m1..m4, n1..n5 of the reduced (u, v) system.

    The second equation is G2 * sigma / v with w eliminated. The commonly quoted
    closed forms for n1 and n3 omit the contribution of the c2*sigma*beta*v*w
    term of G2 and do not vanish at the true steady state; ``uncorrected=True``
    returns those literal expressions for comparison.
    """
    p = params
    s = p.sigma
    if s == 0:
        raise EquilibriumReductionError("equilibrium reduction undefined without cannibalism (sigma = 0)", key="sigma")
    P = p.transmission_excess
    de = p.d + p.e
    q = p.c1 * s - s - s * p.l * p.f - p.lam
    m1 = p.r / p.k
    m2 = p.r * (p.gamma / p.k - 1.0)
    m3 = p.alpha1 + p.alpha2 * (p.l * p.f - p.beta + p.lam / s)
    m4 = -(p.r * p.gamma + p.alpha2 / s * de)
    n1 = p.c2 * P**2 + q * P + (p.c1 * s * p.beta - s * p.beta) * s
    n2 = p.alpha * (p.alpha1 * s + p.alpha2 * P)
    n3 = -(q * de + 2.0 * p.c2 * de * P + s * p.d)
    n4 = -p.alpha * p.alpha2 * de
    n5 = p.c2 * de**2
    if not uncorrected:
        n1 += p.c2 * s * p.beta * P
        n3 -= p.c2 * s * p.beta * de
    return ReducedEquilibriumSystem(m1, m2, m3, m4, n1, n2, n3, n4, n5)


def quintic(red: ReducedEquilibriumSystem, gamma: float) -> Polynomial:
    """(gamma+u) times the second reduced equation, with v = v(u) substituted."""
    if red.m3 == 0:
        raise NumericalError("m3 = 0: v cannot be eliminated")
    v = Polynomial([-red.m4, -red.m2, -red.m1]) / red.m3
    gu = Polynomial([gamma, 1.0])
    x = Polynomial([0.0, 1.0])
    return red.n1 * v * v * gu + red.n2 * x * v + red.n3 * v * gu + red.n4 * x + red.n5 * gu


def _bisect(f, a, b, fa):
    while b - a > BISECT_TOL * max(1.0, abs(a)):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _polish_state(x: np.ndarray, params: ModelParams, iters: int = 4) -> np.ndarray:
    for _ in range(iters):
        g = np.array(kinetics(x, params))
        if np.max(np.abs(g)) < RESIDUAL_TOL * 1e-2:
            break
        J = jacobian_at(x, params).as_array()
        try:
            x = x - np.linalg.solve(J, g)
        except np.linalg.LinAlgError:
            break
    return x


def find_equilibria(params: ModelParams, u_max: float | None = None) -> list[Equilibrium]:
    """All constant positive steady states, ordered by u.

    Roots are bracketed by sign changes of the quintic on ``SCAN_POINTS`` uniform
    steps of (0, u_max] (default u_max = k, which bounds u at any steady state).
    Tangential double roots are not bracketed.
    """
    red = reduce_equilibrium_system(params)
    poly = quintic(red, params.gamma)
    deriv = poly.deriv()
    u_max = params.k if u_max is None else u_max
    grid = np.linspace(u_max / SCAN_POINTS, u_max, SCAN_POINTS)
    vals = poly(grid)
    roots = [float(u) for u, fv in zip(grid, vals) if fv == 0]
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        u = _bisect(poly, grid[i], grid[i + 1], vals[i])
        du = deriv(u)
        if du != 0:
            u -= poly(u) / du
        roots.append(u)

    out = []
    for u in sorted(roots):
        if u <= 0:
            continue
        v = -(red.m1 * u * u + red.m2 * u + red.m4) / red.m3
        w = (params.transmission_excess * v - (params.d + params.e)) / params.sigma
        if v <= 0 or w <= 0:
            continue
        x = np.array([u, v, w])
        if np.max(np.abs(kinetics(x, params))) >= RESIDUAL_TOL:
            x = _polish_state(x, params)
        resid = float(np.max(np.abs(kinetics(x, params))))
        feasible = bool(np.all(x > 0) and params.transmission_excess * x[1] > params.d + params.e)
        out.append(Equilibrium(float(x[0]), float(x[1]), float(x[2]), resid, feasible))
    return out


def select_equilibrium(params: ModelParams, near=None) -> Equilibrium:
    """The unique feasible equilibrium, or the one closest to ``near``."""
    eqs = [e for e in find_equilibria(params) if e.feasible]
    if not eqs:
        raise NumericalError("no feasible positive equilibrium for these parameters")
    if len(eqs) == 1 or near is None:
        if len(eqs) > 1:
            raise NumericalError(f"{len(eqs)} feasible equilibria; pass `near` to choose one")
        return eqs[0]
    near = np.asarray(near, dtype=float)
    return min(eqs, key=lambda e: float(np.linalg.norm(np.array(e.state) - near)))
