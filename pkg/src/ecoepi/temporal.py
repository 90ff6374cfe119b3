"""Time integration of the well-mixed model, Lyapunov spectra and bifurcation sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ecoepi import _kernels
from ecoepi.errors import DivergenceError, NumericalError, ValidationError
from ecoepi.params import ModelParams
from ecoepi.workers import worker_count


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n, 3): columns u, v, w
    params: ModelParams

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class LyapunovSettings:
    dt: float = 0.01
    transient: float = 5000.0
    accumulate: float = 50000.0
    renorm_interval: float = 1.0
    drift_window: float = 0.1  # tail fraction used by the convergence test
    drift_tol: float = 1e-3


@dataclass(frozen=True)
class LyapunovSpectrum:
    L1: float
    L2: float
    L3: float
    transient_time: float
    total_time: float
    renorm_interval: float
    converged: bool
    mean_trace: float  # time-averaged Jacobian trace over the accumulation window
    drift: tuple[float, float, float]

    @property
    def exponents(self) -> tuple[float, float, float]:
        return (self.L1, self.L2, self.L3)

    @property
    def signs(self) -> str:
        return "".join("+" if x > 0 else "-" for x in self.exponents)


@dataclass(frozen=True)
class BifurcationSweep:
    parameter: str
    grid: np.ndarray
    extrema: list[np.ndarray]  # empty array marks a divergent run

    def band_widths(self) -> np.ndarray:
        return np.array([np.ptp(e) if e.size else np.nan for e in self.extrema])

    def settled(self, tol: float = 1e-2) -> np.ndarray:
        return self.band_widths() < tol

    def rows(self):
        for value, ext in zip(self.grid, self.extrema):
            for x in ext:
                yield float(value), float(x)


def _steps(duration: float, dt: float, what: str) -> int:
    n = int(round(duration / dt))
    if n < 0 or abs(n * dt - duration) > 1e-9 * max(1.0, abs(duration)):
        raise ValidationError(f"{what}={duration} is not a multiple of dt={dt}", key=what)
    return n


def _select(params: ModelParams, field, jacobian=None):
    """Pick the compiled loops for the model, plain Python ones for custom fields."""
    if field is None:
        return _kernels.compiled, _kernels.model_rhs, _kernels.model_jac, params.kinetic_vector()
    p = params.kinetic_vector() if params is not None else np.zeros(0)
    return _kernels.python, field, jacobian, p


def _positive_init(init) -> np.ndarray:
    x0 = np.asarray(init, dtype=float)
    if x0.shape != (3,) or not np.all(np.isfinite(x0)):
        raise ValidationError(f"initial state must be three finite numbers, got {init!r}", key="init")
    return x0


def integrate_rk4(params: ModelParams, init, dt: float, t_end: float, every: int = 1,
                  field=None, guard: bool = True) -> Trajectory:
    """Classic fixed-step fourth-order Runge-Kutta.

    ``field(x, p) -> dx/dt`` replaces the model kinetics (``p`` is the parameter
    vector). States are recorded at t=0 and every ``every`` steps. With ``guard``
    any component above 1e6 or below -1e-8 raises ``DivergenceError``.
    """
    if not dt > 0:
        raise ValidationError(f"dt must be positive, got {dt}", key="dt")
    x0 = _positive_init(init)
    if field is None and not np.all(x0 > 0):
        raise ValidationError(f"initial state must be strictly positive, got {init!r}", key="init")
    nsteps = _steps(t_end, dt, "t_end")
    loops, rhs, _, p = _select(params, field)
    states, failed = loops.rk4_run(rhs, p, x0, float(dt), nsteps, int(every), guard)
    if failed >= 0:
        raise DivergenceError(f"trajectory left [-1e-8, 1e6] at step {failed} (t={failed * dt:g})",
                              step=failed, time=failed * dt)
    times = np.arange(states.shape[0]) * (every * dt)
    return Trajectory(times, states, params)


def lyapunov_spectrum(params: ModelParams, init, settings: LyapunovSettings | None = None,
                      field=None, jacobian=None) -> LyapunovSpectrum:
    """Lyapunov exponents by the tangent-space (Benettin) method.

    The state and three tangent vectors are advanced together with RK4; the
    tangent frame is re-orthonormalised by modified Gram-Schmidt every
    ``renorm_interval`` and the log stretch factors are averaged after the
    transient. ``field``/``jacobian`` (both ``f(x, p)``) replace the model.
    """
    s = settings or LyapunovSettings()
    if not (s.dt > 0 and s.transient >= 0 and s.accumulate > 0 and s.renorm_interval > 0):
        raise ValidationError(f"invalid Lyapunov settings {s}")
    if s.renorm_interval > s.accumulate:
        raise ValidationError("renorm_interval exceeds the accumulation time")
    x0 = _positive_init(init)
    if field is None and not np.all(x0 > 0):
        raise ValidationError(f"initial state must be strictly positive, got {init!r}", key="init")
    if (field is None) != (jacobian is None):
        raise ValidationError("field and jacobian must be given together")
    n_tr = _steps(s.transient, s.dt, "transient")
    n_acc = _steps(s.accumulate, s.dt, "accumulate")
    renorm = _steps(s.renorm_interval, s.dt, "renorm_interval")
    if renorm == 0 or n_acc % renorm:
        raise ValidationError("accumulate must be a whole number of renorm intervals")
    loops, rhs, jac, p = _select(params, field, jacobian)
    log_sums, trace_int, history, _, failed = loops.benettin_run(
        rhs, jac, p, x0, float(s.dt), n_tr, n_acc, renorm, field is None)
    if failed >= 0:
        raise DivergenceError(f"trajectory left [-1e-8, 1e6] at step {failed} (t={failed * s.dt:g})",
                              step=failed, time=failed * s.dt)
    elapsed = n_acc * s.dt
    exps = np.sort(log_sums / elapsed)[::-1]
    tail = max(1, int(len(history) * s.drift_window))
    if len(history) > tail:
        drift = np.abs(np.sort(history[-1])[::-1] - np.sort(history[-1 - tail])[::-1])
    else:
        drift = np.full(3, np.inf)
    converged = bool(np.all(drift <= s.drift_tol))
    return LyapunovSpectrum(float(exps[0]), float(exps[1]), float(exps[2]), s.transient,
                            s.transient + s.accumulate, s.renorm_interval, converged,
                            float(trace_int / elapsed), tuple(float(d) for d in drift))


def local_extrema(series: np.ndarray) -> np.ndarray:
    """Values at interior sign changes of the discrete derivative."""
    diff = np.diff(series)
    idx = np.nonzero(diff[:-1] * diff[1:] < 0)[0] + 1
    return series[idx]


def _sweep_point(params: ModelParams, which: str, value: float, init, dt, transient, window) -> np.ndarray:
    p = params.with_(**{which: value})
    try:
        burn = integrate_rk4(p, init, dt, transient, every=max(1, _steps(transient, dt, "transient")))
        tail = integrate_rk4(p, burn.final, dt, window)
    except (NumericalError, ValidationError):
        return np.empty(0)
    v = tail.states[:, 1]
    ext = local_extrema(v)
    # Monotone approach to a fixed point has no turning points; keep the end value.
    return ext if ext.size else v[-1:].copy()


def bifurcation_sweep(params: ModelParams, which: str, grid, init, transient: float = 10000.0,
                      window: float = 5000.0, dt: float = 0.01, workers: int | None = None) -> BifurcationSweep:
    """Post-transient local extrema of v for each value of ``which`` on ``grid``."""
    name = {"lambda": "lam"}.get(which, which)
    if name not in ("lam", "sigma"):
        raise ValidationError(f"bifurcation parameter must be lambda or sigma, got {which!r}", key="which")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be a non-empty strictly increasing sequence", key="grid")
    if np.any(grid < 0):
        raise ValidationError("grid values must be non-negative", key="grid")

    def run(value):
        return _sweep_point(params, name, float(value), init, dt, transient, window)

    n = worker_count(workers)
    if n > 1 and grid.size > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            extrema = list(pool.map(run, grid))
    else:
        extrema = [run(g) for g in grid]
    return BifurcationSweep("lambda" if name == "lam" else name, grid, extrema)


def euler_trajectory(params: ModelParams, init, dt: float, nsteps: int) -> np.ndarray:
    """Forward-Euler states of the well-mixed model (nsteps + 1 rows)."""
    q = tuple(params.kinetic_vector())
    x = np.asarray(init, dtype=float).copy()
    out = np.empty((nsteps + 1, 3))
    out[0] = x
    for i in range(1, nsteps + 1):
        g = _kernels.rhs_scalar.py_func(x[0], x[1], x[2], q)
        x = x + dt * np.array(g)
        out[i] = x
    return out


def mean_trace(params: ModelParams, traj: Trajectory) -> float:
    """Trapezoidal time average of the Jacobian trace along a recorded trajectory."""
    p = params.kinetic_vector()
    tr = np.array([np.trace(_kernels.model_jac(x, p)) for x in traj.states])
    span = traj.times[-1] - traj.times[0]
    return float(np.trapezoid(tr, traj.times) / span) if span > 0 else math.nan
