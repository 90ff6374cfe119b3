"""Explicit FTCS integration of the reaction-diffusion system on a square grid.

Zero-flux boundaries use first-order mirroring: the ghost node outside each
edge copies the edge node, so the discrete normal difference is exactly zero
and the plain node sum of a purely diffusing field is conserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ecoepi import _kernels
from ecoepi.equilibria import Equilibrium
from ecoepi.errors import NumericalError, ValidationError
from ecoepi.params import ModelParams
from ecoepi.workers import worker_count

FIELDS = ("u", "v", "w")
NEG_TOL = 1e-10
TIME_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    L: float = math.pi
    h: float = 0.01
    dt: float = 0.01
    diffusion: tuple[float, float, float] | None = None  # checked against the stability guard when given

    def __post_init__(self):
        if not (self.L > 0 and self.h > 0 and self.dt > 0):
            raise ValidationError(f"L, h and dt must be positive, got L={self.L}, h={self.h}, dt={self.dt}")
        if self.nx < 3:
            raise ValidationError(f"grid needs at least 3 nodes per side, got {self.nx}", key="h")
        if self.diffusion is not None:
            self.check(self.diffusion)

    @classmethod
    def coarse(cls, L: float = math.pi, diffusion=None) -> "GridSpec":
        return cls(L=L, h=0.02, dt=0.01, diffusion=diffusion)

    @classmethod
    def for_params(cls, params: ModelParams, L: float = math.pi, h: float = 0.01, dt: float = 0.01) -> "GridSpec":
        return cls(L=L, h=h, dt=dt, diffusion=params.diffusion)

    @property
    def nx(self) -> int:
        return int(round(self.L / self.h)) + 1

    @property
    def ny(self) -> int:
        return self.nx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def coordinates(self) -> np.ndarray:
        return np.arange(self.nx) * self.h

    def stability_number(self, diffusion) -> float:
        return max(diffusion) * self.dt * 4.0 / self.h**2

    def check(self, diffusion) -> None:
        """Explicit five-point bound max(d) dt 4 / h^2 < 1."""
        if any(d < 0 for d in diffusion):
            raise ValidationError(f"diffusion coefficients must be >= 0, got {tuple(diffusion)}")
        n = self.stability_number(diffusion)
        if not n < 1:
            raise ValidationError(
                f"unstable FTCS grid: max(d)*dt*4/h^2 = {n:.4g} >= 1 (h={self.h}, dt={self.dt})", key="dt")

    def steps(self, duration: float) -> int:
        n = int(round(duration / self.dt))
        if n < 0 or abs(n * self.dt - duration) > TIME_TOL:
            raise ValidationError(f"time {duration} is not a multiple of dt={self.dt}", key="time")
        return n


@dataclass(frozen=True)
class FieldGrid:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: float

    def __post_init__(self):
        shapes = {a.shape for a in (self.u, self.v, self.w)}
        if len(shapes) != 1 or len(next(iter(shapes))) != 2:
            raise ValidationError(f"fields must be equal-shaped 2-D arrays, got {shapes}")
        for name in FIELDS:
            a = np.array(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(a)):
                raise ValidationError(f"field {name} contains non-finite values", key=name)
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape

    def field(self, name: str) -> np.ndarray:
        if name not in FIELDS:
            raise ValidationError(f"unknown field {name!r}", key="field")
        return getattr(self, name)

    def items(self):
        return ((f, getattr(self, f)) for f in FIELDS)

    def amplitude(self) -> dict[str, float]:
        return {f: float(np.ptp(a)) for f, a in self.items()}

    def mass(self, h: float) -> dict[str, float]:
        return {f: float(a.sum() * h * h) for f, a in self.items()}


@dataclass(frozen=True)
class SnapshotSchedule:
    times: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        if not t:
            raise ValidationError("snapshot schedule is empty", key="times")
        if any(x < 0 for x in t) or any(b <= a for a, b in zip(t, t[1:])):
            raise ValidationError(f"snapshot times must be non-negative and strictly increasing, got {t}",
                                  key="times")
        object.__setattr__(self, "times", t)

    def validate(self, dt: float) -> list[int]:
        steps = []
        for x in self.times:
            n = int(round(x / dt))
            if abs(n * dt - x) > TIME_TOL:
                raise ValidationError(f"snapshot time {x} is not a multiple of dt={dt}", key="times")
            steps.append(n)
        return steps

    @property
    def t_end(self) -> float:
        return self.times[-1]


def initial_condition(eq: Equilibrium | tuple, grid: GridSpec, amplitude: float = 0.1,
                      perturb: tuple[str, ...] = FIELDS) -> FieldGrid:
    """Steady state plus amplitude * cos^2(10x) cos^2(10y) on the chosen fields."""
    if isinstance(eq, Equilibrium):
        if not eq.feasible:
            raise ValidationError(f"equilibrium {eq.state} is not feasible")
        state = eq.state
    else:
        state = tuple(float(x) for x in eq)
    unknown = set(perturb) - set(FIELDS)
    if unknown:
        raise ValidationError(f"unknown fields {sorted(unknown)}", key="perturb")
    x = grid.coordinates()
    bump = amplitude * np.outer(np.cos(10 * x) ** 2, np.cos(10 * x) ** 2)
    arrays = [np.full(grid.shape, s) + (bump if f in perturb else 0.0) for f, s in zip(FIELDS, state)]
    return FieldGrid(*arrays, 0.0)


def constant_fields(state, grid: GridSpec, t: float = 0.0) -> FieldGrid:
    return FieldGrid(*(np.full(grid.shape, float(s)) for s in state), t)


def ghost_padded(a: np.ndarray) -> np.ndarray:
    """The array with the zero-flux ghost layer the stencil sees."""
    out = np.zeros((a.shape[0] + 2, a.shape[1] + 2))
    out[1:-1, 1:-1] = a
    _kernels.refresh_ghosts(out)
    return out


def _advance(fields: FieldGrid, params: ModelParams, grid: GridSpec, nsteps: int,
             react: bool, parallel: bool) -> FieldGrid:
    if fields.shape != grid.shape:
        raise ValidationError(f"field shape {fields.shape} does not match grid {grid.shape}")
    if nsteps == 0:
        return fields
    u, v, w, failed, i, j = _kernels.ftcs_advance(
        fields.u, fields.v, fields.w, params.kinetic_vector(), params.diffusion,
        grid.dt, grid.h, nsteps, react=react, parallel=parallel, neg_tol=NEG_TOL)
    if failed >= 0:
        t = fields.t + failed * grid.dt
        raise NumericalError(f"FTCS produced a non-finite or negative value at node ({i}, {j}), t={t:g}")
    return FieldGrid(u, v, w, fields.t + nsteps * grid.dt)


def ftcs_step(fields: FieldGrid, params: ModelParams, grid: GridSpec, react: bool = True) -> FieldGrid:
    """One explicit step: s + dt * (G_s + d_s * five-point Laplacian)."""
    grid.check(params.diffusion)
    return _advance(fields, params, grid, 1, react, False)


def simulate(params: ModelParams, eq: Equilibrium | None, grid: GridSpec, schedule: SnapshotSchedule,
             initial: FieldGrid | None = None, react: bool = True, parallel: bool | None = None,
             progress=None) -> list[tuple[float, FieldGrid]]:
    """Run to the last scheduled time and return the captured snapshots.

    ``initial`` defaults to the perturbed steady state. ``parallel=None`` uses
    the row-parallel stencil when more than one worker is available.
    ``progress(t, snapshot)`` is called after each capture.
    """
    grid.check(params.diffusion)
    steps = schedule.validate(grid.dt)
    if initial is None:
        if eq is None:
            raise ValidationError("either eq or initial fields are required")
        initial = initial_condition(eq, grid)
    if initial.t != 0.0:
        raise ValidationError("initial fields must start at t=0", key="initial")
    if parallel is None:
        parallel = worker_count() > 1
    out = []
    state, done = initial, 0
    for t, n in zip(schedule.times, steps):
        try:
            state = _advance(state, params, grid, n - done, react, parallel)
        except NumericalError as exc:
            raise NumericalError(f"{exc} (while advancing towards snapshot t={t:g})") from exc
        done = n
        snap = FieldGrid(state.u, state.v, state.w, t)
        out.append((t, snap))
        if progress is not None:
            progress(t, snap)
    return out
