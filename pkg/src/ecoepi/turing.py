"""Linear stability of the homogeneous steady state against spatial modes.

For a mode with wave number k the linearisation is J - k^2 diag(d1, d2, d3), whose
characteristic polynomial is lam^3 + rho1 lam^2 + rho2 lam + rho3. With z = k^2,
rho3(z) and Phi(z) = rho1 rho2 - rho3 are cubics in z; a negative minimum of
either over z > 0 signals diffusion-driven instability.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ecoepi.equilibria import Equilibrium, find_equilibria
from ecoepi.errors import NumericalError, ValidationError
from ecoepi.model import Jacobian3, jacobian_at
from ecoepi.params import ModelParams
from ecoepi.stability import a_priori_bounds
from ecoepi.workers import worker_count

PLANAR_STABLE = "planar_stable"
TURING = "turing"
HOPF_UNSTABLE = "hopf_unstable"
STABLE_EVERYWHERE = "stable_everywhere"
INFEASIBLE = "infeasible"
VERDICTS = (PLANAR_STABLE, TURING, HOPF_UNSTABLE, STABLE_EVERYWHERE, INFEASIBLE)

LEGEND = {
    TURING: "Turing instability (stable at k=0, unstable for some k>0)",
    PLANAR_STABLE: "planar stability (stable at k=0; closed-form Turing test vacuous)",
    STABLE_EVERYWHERE: "planar stability (closed-form minima exist and are positive)",
    HOPF_UNSTABLE: "non-Turing region (homogeneous state unstable at k=0)",
    INFEASIBLE: "no feasible positive equilibrium",
}


@dataclass(frozen=True)
class DispersionSample:
    k: float
    rho1: float
    rho2: float
    rho3: float
    phi: float


@dataclass(frozen=True)
class DispersionPolynomials:
    """rho1 = b z - a, rho2 = p1 z^2 + p2 z + p3, rho3 = q1 z^3 + ... + q4, Phi = r1 z^3 + ... + r4."""

    a: float
    b: float
    p: tuple[float, float, float]
    q: tuple[float, float, float, float]
    r: tuple[float, float, float, float]


@dataclass(frozen=True)
class TuringDiagnostic:
    q1: float
    q2: float
    q3: float
    q4: float
    r1: float
    r2: float
    r3: float
    r4: float
    kd_sq: float | None
    kf_sq: float | None
    rho3_min: float | None
    phi_min: float | None
    planar_stable: bool
    verdict: str


@dataclass(frozen=True)
class HopfPoint:
    axis: int  # 0: crossing between rows (axis-1 parameter), 1: between columns
    cell_a: tuple[int, int]
    cell_b: tuple[int, int]
    value: float  # bisected crossing of phi(0) in that axis' parameter


@dataclass(frozen=True)
class RegionMap:
    axis1: tuple[str, np.ndarray]
    axis2: tuple[str, np.ndarray]
    verdicts: np.ndarray  # shape (len(grid1), len(grid2)), dtype object
    phi0: np.ndarray
    hopf: list[HopfPoint] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        vals, n = np.unique(self.verdicts.astype(str), return_counts=True)
        return dict(zip(vals.tolist(), n.tolist()))

    def rows(self):
        (_, g1), (_, g2) = self.axis1, self.axis2
        for i, x in enumerate(g1):
            for j, y in enumerate(g2):
                yield float(x), float(y), str(self.verdicts[i, j])


@dataclass(frozen=True)
class DomainSpectrum:
    """Neumann eigenvalues of -Laplacian on [0, L]^2: (pi/L)^2 (m^2 + n^2)."""

    L: float
    mu: np.ndarray

    @classmethod
    def square(cls, L: float = math.pi, n_modes: int = 10) -> "DomainSpectrum":
        if not L > 0:
            raise ValidationError(f"domain length must be positive, got {L}", key="L")
        m = np.arange(n_modes)
        vals = np.unique(((m[:, None] ** 2 + m[None, :] ** 2) * (math.pi / L) ** 2).ravel())
        return cls(L, vals)

    @property
    def mu1(self) -> float:
        return float(self.mu[1])


@dataclass(frozen=True)
class NonexistenceReport:
    mu1: float
    w_prime: float
    d1_star: float
    d2_star: float
    d1_meets: bool
    d2_meets: bool
    note: str = "the d3 threshold exists but has no closed form; not evaluated"


def dispersion_polynomials(jac: Jacobian3, diffusion) -> DispersionPolynomials:
    d1, d2, d3 = diffusion
    j = jac
    a = j.trace
    b = d1 + d2 + d3
    p1 = d1 * d2 + d2 * d3 + d3 * d1
    p2 = -(j.a11 * (d2 + d3) + j.a22 * (d3 + d1) + j.a33 * (d1 + d2))
    p3 = j.principal_minor_sum
    q1 = d1 * d2 * d3
    q2 = -(j.a11 * d2 * d3 + j.a22 * d1 * d3 + j.a33 * d1 * d2)
    q3 = (j.a11 * j.a33 * d2 + j.a22 * j.a33 * d1 + j.a11 * j.a22 * d3
          - d3 * j.a12 * j.a21 - d1 * j.a23 * j.a32)
    q4 = -j.det
    r1 = b * p1 - q1
    r2 = b * p2 - a * p1 - q2
    r3 = b * p3 - a * p2 - q3
    r4 = -(a * p3 + q4)
    return DispersionPolynomials(a, b, (p1, p2, p3), (q1, q2, q3, q4), (r1, r2, r3, r4))


def _cubic(c, z):
    return ((c[0] * z + c[1]) * z + c[2]) * z + c[3]


def dispersion(eq: Equilibrium, params: ModelParams, k: float) -> DispersionSample:
    """rho coefficients at scalar wave number k (k^2 = kx^2 with ky = 0)."""
    if not eq.feasible:
        raise ValidationError(f"equilibrium {eq.state} is not feasible")
    if k < 0:
        raise ValidationError(f"wave number must be >= 0, got {k}", key="k")
    poly = dispersion_polynomials(jacobian_at(eq.state, params), params.diffusion)
    z = k * k
    rho1 = poly.b * z - poly.a
    rho2 = (poly.p[0] * z + poly.p[1]) * z + poly.p[2]
    rho3 = _cubic(poly.q, z)
    return DispersionSample(float(k), rho1, rho2, rho3, rho1 * rho2 - rho3)


def dispersion_curve(eq: Equilibrium, params: ModelParams, ks) -> list[DispersionSample]:
    return [dispersion(eq, params, float(k)) for k in ks]


def _cubic_minimum(c) -> tuple[float | None, float | None]:
    """Closed-form local minimiser of c1 z^3 + c2 z^2 + c3 z + c4 on z > 0 and its value.

    The larger critical point is a positive local minimum whenever
    c2^2 - 3 c1 c3 > 0 and either c2 < 0 or c3 < 0 (for c1 > 0). With c1 of
    order 1e-18 the textbook expressions cancel catastrophically, so the root is
    rationalised when c2 > 0 and the value uses rho'(z) = 0 to drop the cubic
    term: rho(z) = c2 z^2 / 3 + 2 c3 z / 3 + c4.
    """
    c1, c2, c3, c4 = c
    disc = c2 * c2 - 3.0 * c1 * c3
    if not (disc > 0 and c1 > 0):
        return None, None
    root = math.sqrt(disc)
    zmin = (root - c2) / (3.0 * c1) if c2 <= 0 else -c3 / (c2 + root)
    if not zmin > 0:
        return None, None
    return zmin, (c2 * zmin / 3.0 + 2.0 * c3 / 3.0) * zmin + c4


def textbook_minimum_value(c) -> float:
    """(2c2^3 - 9c1c2c3 + 27c1^2 c4 - 2(c2^2 - 3c1c3)^(3/2)) / (27 c1^2); ill-conditioned for tiny c1."""
    c1, c2, c3, c4 = c
    disc = c2 * c2 - 3.0 * c1 * c3
    return (2 * c2**3 - 9 * c1 * c2 * c3 + 27 * c1**2 * c4 - 2 * disc**1.5) / (27 * c1**2)


def turing_check(eq: Equilibrium, params: ModelParams) -> TuringDiagnostic:
    if not eq.feasible:
        raise ValidationError(f"equilibrium {eq.state} is not feasible")
    poly = dispersion_polynomials(jacobian_at(eq.state, params), params.diffusion)
    rho1_0 = -poly.a
    rho3_0 = poly.q[3]
    phi_0 = poly.r[3]
    planar = rho1_0 > 0 and rho3_0 > 0 and phi_0 > 0
    kd, rho3_min = _cubic_minimum(poly.q)
    kf, phi_min = _cubic_minimum(poly.r)
    if not planar:
        verdict = HOPF_UNSTABLE
    elif (rho3_min is not None and rho3_min < 0) or (phi_min is not None and phi_min < 0):
        verdict = TURING
    elif rho3_min is not None and phi_min is not None:
        verdict = STABLE_EVERYWHERE
    else:
        verdict = PLANAR_STABLE
    return TuringDiagnostic(*poly.q, *poly.r, kd, kf, rho3_min, phi_min, planar, verdict)


@lru_cache(maxsize=4096)
def _feasible_equilibrium(params: ModelParams) -> Equilibrium | None:
    # Diffusion does not move the steady state; cache on the kinetic part only.
    eqs = [e for e in find_equilibria(params) if e.feasible]
    if not eqs:
        return None
    if len(eqs) > 1:
        raise NumericalError(f"{len(eqs)} feasible equilibria at {params}; region scans need a unique one")
    return eqs[0]


def _kinetic_only(params: ModelParams) -> ModelParams:
    return params.with_(d1=0.0, d2=0.0, d3=0.0)


def _cell(params: ModelParams) -> tuple[str, float]:
    eq = _feasible_equilibrium(_kinetic_only(params))
    if eq is None:
        return INFEASIBLE, math.nan
    diag = turing_check(eq, params)
    return diag.verdict, diag.r4


def _phi0(params: ModelParams) -> float:
    eq = _feasible_equilibrium(_kinetic_only(params))
    if eq is None:
        return math.nan
    return dispersion_polynomials(jacobian_at(eq.state, params), params.diffusion).r[3]


def _bisect_crossing(base: ModelParams, name: str, lo: float, hi: float, tol: float = 1e-6) -> float:
    f_lo = _phi0(base.with_(**{name: lo}))
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        f_mid = _phi0(base.with_(**{name: mid}))
        if math.isnan(f_mid):
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def region_scan(base: ModelParams, axis1: tuple[str, list], axis2: tuple[str, list],
                workers: int | None = None) -> RegionMap:
    """Classify every cell of a two-parameter grid and locate the Hopf line.

    Hopf crossings are sign changes of phi(0) = rho1(0) rho2(0) - rho3(0)
    between neighbouring cells where rho1(0), rho3(0) > 0 on the stable side.
    """
    (n1, g1), (n2, g2) = axis1, axis2
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if g1.size == 0 or g2.size == 0:
        raise ValidationError("region grids must be non-empty")
    cells = [(i, j) for i in range(g1.size) for j in range(g2.size)]

    def cell_params(i, j):
        return base.with_(**{n1: g1[i], n2: g2[j]})

    def run(ij):
        return _cell(cell_params(*ij))

    n = worker_count(workers)
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]
    verdicts = np.empty((g1.size, g2.size), dtype=object)
    phi0 = np.full((g1.size, g2.size), np.nan)
    for (i, j), (v, p) in zip(cells, results):
        verdicts[i, j] = v
        phi0[i, j] = p

    hopf = []
    for axis, (di, dj), grid, name in ((0, (1, 0), g1, n1), (1, (0, 1), g2, n2)):
        for i, j in cells:
            a, b = (i, j), (i + di, j + dj)
            if b[0] >= g1.size or b[1] >= g2.size:
                continue
            fa, fb = phi0[a], phi0[b]
            if not (np.isfinite(fa) and np.isfinite(fb)) or np.sign(fa) == np.sign(fb):
                continue
            stable_side = a if fa > 0 else b
            if verdicts[stable_side] not in (TURING, PLANAR_STABLE, STABLE_EVERYWHERE):
                continue
            lo, hi = grid[a[axis]], grid[b[axis]]
            value = _bisect_crossing(cell_params(*a), name, lo, hi)
            hopf.append(HopfPoint(axis, a, b, value))
    return RegionMap((n1, g1), (n2, g2), verdicts, phi0, hopf)


def nonexistence_thresholds(params: ModelParams, L: float = math.pi,
                            w_prime: float | None = None) -> NonexistenceReport:
    """Diffusion levels above which no non-constant positive steady state exists."""
    mu1 = DomainSpectrum.square(L, 3).mu1
    if w_prime is None:
        bounds = a_priori_bounds(params)
        if not bounds.valid:
            raise ValidationError(f"a priori bounds invalid: {bounds.diagnostic}")
        w_prime = bounds.w_max
    if w_prime < 0:
        raise ValidationError(f"w_prime must be >= 0, got {w_prime}", key="w_prime")
    d1_star = params.r / mu1
    d2_star = params.sigma * w_prime * (params.c1 + params.c2 * params.beta) / mu1
    return NonexistenceReport(mu1, w_prime, d1_star, d2_star, params.d1 >= d1_star, params.d2 >= d2_star)
