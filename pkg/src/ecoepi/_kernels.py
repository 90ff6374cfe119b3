"""Compiled inner loops.

The generic loops take the vector field (and Jacobian) as arguments and are built
twice from one source: ``compiled`` (numba, for jitted fields such as the model)
and ``python`` (plain functions, for arbitrary callables such as analytic test
fields).

Parameter vectors follow ``params.KINETIC_KEYS``.
"""

from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np
from numba import njit, prange

DIVERGENCE_HIGH = 1e6
DIVERGENCE_LOW = -1e-8


@njit(cache=True, error_model="numpy", inline="always")
def as_tuple(p):
    return (p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9], p[10], p[11], p[12], p[13], p[14])


@njit(cache=True, error_model="numpy", inline="always")
def rhs_scalar(u, v, w, q):
    """Reaction terms at one point; ``q`` is the parameter tuple (see ``as_tuple``)."""
    r, k, lam, a1, a2, g, al, d, e, s, c1, c2, b, l, f = q
    pred = (a1 * v + a2 * w) * u / (g + u)
    g1 = r * u * (1.0 - u / k) - pred
    g2 = (al * pred + c1 * s * (b * v + w) * v + c2 * s * (b * v + w) * w
          - s * (b * v + w) * v - s * l * f * v * w - lam * v * w - d * v)
    g3 = lam * v * w + s * l * f * v * w - s * (b * v + w) * w - (d + e) * w
    return g1, g2, g3


@njit(cache=True, error_model="numpy")
def model_rhs(x, p):
    out = np.empty(3)
    out[0], out[1], out[2] = rhs_scalar(x[0], x[1], x[2], as_tuple(p))
    return out


@njit(cache=True, error_model="numpy")
def model_jac(x, p):
    r, k, lam, a1, a2, g, al, d, e, s, c1, c2, b, l, f = (
        p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9], p[10], p[11], p[12], p[13], p[14]
    )
    u, v, w = x[0], x[1], x[2]
    gu = g + u
    pr = a1 * v + a2 * w
    # d/du [pr*u/(g+u)] = pr*g/(g+u)^2
    dpdu = pr * g / (gu * gu)
    J = np.empty((3, 3))
    J[0, 0] = r - 2.0 * r * u / k - dpdu
    J[0, 1] = -a1 * u / gu
    J[0, 2] = -a2 * u / gu
    J[1, 0] = al * dpdu
    J[1, 1] = (al * a1 * u / gu + c1 * s * (2.0 * b * v + w) + c2 * s * b * w
               - s * (2.0 * b * v + w) - s * l * f * w - lam * w - d)
    J[1, 2] = (al * a2 * u / gu + c1 * s * v + c2 * s * (b * v + 2.0 * w)
               - s * v - s * l * f * v - lam * v)
    J[2, 0] = 0.0
    J[2, 1] = lam * w + s * l * f * w - s * b * w
    J[2, 2] = lam * v + s * l * f * v - s * (b * v + 2.0 * w) - (d + e)
    return J


def _build(jit):
    """Build the generic loops with ``jit`` applied to every function."""

    @jit
    def _rk4_step(rhs, x, p, dt):
        k1 = rhs(x, p)
        k2 = rhs(x + 0.5 * dt * k1, p)
        k3 = rhs(x + 0.5 * dt * k2, p)
        k4 = rhs(x + dt * k3, p)
        return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


    @jit
    def rk4_run(rhs, p, x0, dt, nsteps, every, guard):
        """Fixed-step RK4. Returns (states, failed_step); failed_step is -1 on success.

        ``states`` holds x0 and every ``every``-th state; on failure it is truncated
        after the last good recorded state.
        """
        n_rec = nsteps // every + 1
        states = np.empty((n_rec, x0.shape[0]))
        x = x0.copy()
        states[0] = x
        rec = 1
        for i in range(1, nsteps + 1):
            x = _rk4_step(rhs, x, p, dt)
            if guard:
                for j in range(x.shape[0]):
                    xj = x[j]
                    if not (xj <= DIVERGENCE_HIGH and xj >= DIVERGENCE_LOW):
                        return states[:rec], i
            if i % every == 0:
                states[rec] = x
                rec += 1
        return states[:rec], -1


    @jit
    def _tangent_rhs(rhs, jac, y, p, n):
        """Augmented field: state, n x n tangent block (row-major), then trace J."""
        x = y[:n]
        out = np.empty(y.shape[0])
        out[:n] = rhs(x, p)
        J = jac(x, p)
        Q = y[n:n + n * n].reshape((n, n))
        out[n:n + n * n] = (J @ Q).ravel()
        tr = 0.0
        for i in range(n):
            tr += J[i, i]
        out[n + n * n] = tr
        return out


    @jit
    def _mgs(Q):
        """Modified Gram-Schmidt on the columns of Q, in place; returns the column norms."""
        n = Q.shape[1]
        norms = np.empty(n)
        for j in range(n):
            for i in range(j):
                proj = 0.0
                for m in range(Q.shape[0]):
                    proj += Q[m, i] * Q[m, j]
                for m in range(Q.shape[0]):
                    Q[m, j] -= proj * Q[m, i]
            nrm = 0.0
            for m in range(Q.shape[0]):
                nrm += Q[m, j] * Q[m, j]
            nrm = math.sqrt(nrm)
            norms[j] = nrm
            for m in range(Q.shape[0]):
                Q[m, j] /= nrm
        return norms


    @jit
    def benettin_run(rhs, jac, p, x0, dt, n_transient, n_accum, renorm_every, guard):
        """Tangent-space Lyapunov loop.

        Returns (log_sums, trace_integral, history, final_state, failed_step) where
        ``history[i]`` holds the running exponent estimates after the i-th
        accumulation renormalisation.
        """
        n = x0.shape[0]
        y = np.zeros(n + n * n + 1)
        y[:n] = x0
        Q = np.eye(n)
        y[n:n + n * n] = Q.ravel()
        log_sums = np.zeros(n)
        n_hist = n_accum // renorm_every
        history = np.zeros((n_hist, n))
        h = 0
        elapsed = 0.0
        trace_start = 0.0
        total = n_transient + n_accum
        for i in range(1, total + 1):
            k1 = _tangent_rhs(rhs, jac, y, p, n)
            k2 = _tangent_rhs(rhs, jac, y + 0.5 * dt * k1, p, n)
            k3 = _tangent_rhs(rhs, jac, y + 0.5 * dt * k2, p, n)
            k4 = _tangent_rhs(rhs, jac, y + dt * k3, p, n)
            y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if guard:
                for j in range(n):
                    if not (y[j] <= DIVERGENCE_HIGH and y[j] >= DIVERGENCE_LOW):
                        return log_sums, 0.0, history[:h], y[:n].copy(), i
            if i == n_transient:
                trace_start = y[n + n * n]
            step_in_phase = i if i <= n_transient else i - n_transient
            if step_in_phase % renorm_every == 0:
                Q = y[n:n + n * n].reshape((n, n)).copy()
                norms = _mgs(Q)
                y[n:n + n * n] = Q.ravel()
                if i > n_transient:
                    elapsed += renorm_every * dt
                    for j in range(n):
                        log_sums[j] += math.log(norms[j])
                    if h < n_hist:
                        for j in range(n):
                            history[h, j] = log_sums[j] / elapsed
                        h += 1
        trace_integral = y[n + n * n] - trace_start
        return log_sums, trace_integral, history[:h], y[:n].copy(), -1

    return SimpleNamespace(rk4_step=_rk4_step, rk4_run=rk4_run, mgs=_mgs, benettin_run=benettin_run)


def _plain(func):
    return func


compiled = _build(njit(cache=True, error_model="numpy", nogil=True))
python = _build(_plain)


@njit(cache=True, error_model="numpy", inline="always")
def _refresh_ghosts(s):
    # Zero-flux: the ghost layer copies the adjacent boundary node.
    nx = s.shape[0] - 2
    ny = s.shape[1] - 2
    for j in range(1, ny + 1):
        s[0, j] = s[1, j]
        s[nx + 1, j] = s[nx, j]
    for i in range(1, nx + 1):
        s[i, 0] = s[i, 1]
        s[i, ny + 1] = s[i, ny]


@njit(cache=True, error_model="numpy", inline="always")
def _update_row(u, v, w, un, vn, wn, i, q, c1, c2, c3, dt, react):
    ny = u.shape[1] - 2
    for j in range(1, ny + 1):
        uc = u[i, j]
        vc = v[i, j]
        wc = w[i, j]
        if react:
            g0, g1, g2 = rhs_scalar(uc, vc, wc, q)
        else:
            g0 = 0.0
            g1 = 0.0
            g2 = 0.0
        lu = (u[i - 1, j] + u[i + 1, j]) + (u[i, j - 1] + u[i, j + 1]) - 4.0 * uc
        lv = (v[i - 1, j] + v[i + 1, j]) + (v[i, j - 1] + v[i, j + 1]) - 4.0 * vc
        lw = (w[i - 1, j] + w[i + 1, j]) + (w[i, j - 1] + w[i, j + 1]) - 4.0 * wc
        un[i, j] = uc + dt * (g0 + c1 * lu)
        vn[i, j] = vc + dt * (g1 + c2 * lv)
        wn[i, j] = wc + dt * (g2 + c3 * lw)


@njit(cache=True, error_model="numpy", inline="always")
def _clamp_row(s, i, tol):
    """Zero roundoff negatives in padded row ``i``; return first bad column or -1."""
    for j in range(1, s.shape[1] - 1):
        x = s[i, j]
        if not x >= 0.0:
            if not x >= -tol:
                return j
            s[i, j] = 0.0
    return -1


@njit(cache=True, error_model="numpy")
def _ftcs_loop(u, v, w, p, c1, c2, c3, dt, nsteps, react, tol):
    q = as_tuple(p)
    un, vn, wn = u.copy(), v.copy(), w.copy()
    nx = u.shape[0] - 2
    for step in range(1, nsteps + 1):
        _refresh_ghosts(u)
        _refresh_ghosts(v)
        _refresh_ghosts(w)
        for i in range(1, nx + 1):
            _update_row(u, v, w, un, vn, wn, i, q, c1, c2, c3, dt, react)
        for i in range(1, nx + 1):
            for s in (un, vn, wn):
                bad = _clamp_row(s, i, tol)
                if bad >= 0:
                    return un, vn, wn, step, i - 1, bad - 1
        u, un = un, u
        v, vn = vn, v
        w, wn = wn, w
    return u, v, w, -1, -1, -1


@njit(cache=True, error_model="numpy", parallel=True)
def _ftcs_loop_parallel(u, v, w, p, c1, c2, c3, dt, nsteps, react, tol):
    q = as_tuple(p)
    un, vn, wn = u.copy(), v.copy(), w.copy()
    nx = u.shape[0] - 2
    bads = np.empty(nx, dtype=np.int64)
    for step in range(1, nsteps + 1):
        _refresh_ghosts(u)
        _refresh_ghosts(v)
        _refresh_ghosts(w)
        for i in prange(1, nx + 1):
            _update_row(u, v, w, un, vn, wn, i, q, c1, c2, c3, dt, react)
            bad = _clamp_row(un, i, tol)
            if bad < 0:
                bad = _clamp_row(vn, i, tol)
            if bad < 0:
                bad = _clamp_row(wn, i, tol)
            bads[i - 1] = bad
        for i in range(nx):
            if bads[i] >= 0:
                return un, vn, wn, step, i, bads[i] - 1
        u, un = un, u
        v, vn = vn, v
        w, wn = wn, w
    return u, v, w, -1, -1, -1


def refresh_ghosts(s):
    """Fill the ghost layer of a padded array in place (corners untouched)."""
    _refresh_ghosts(s)


def ftcs_advance(u, v, w, p, diff, dt, h, nsteps, react=True, parallel=False, neg_tol=1e-10):
    """Advance the three fields ``nsteps`` FTCS steps (inputs are not modified).

    Returns (u, v, w, failed_step, i, j); failed_step is -1 on success, otherwise
    the 1-based step at which node (i, j) went non-finite or below ``-neg_tol``.
    """
    padded = []
    for s in (u, v, w):
        a = np.empty((s.shape[0] + 2, s.shape[1] + 2))
        a[1:-1, 1:-1] = s
        padded.append(a)
    inv_h2 = 1.0 / (h * h)
    loop = _ftcs_loop_parallel if parallel else _ftcs_loop
    uo, vo, wo, failed, i, j = loop(padded[0], padded[1], padded[2], p,
                                    diff[0] * inv_h2, diff[1] * inv_h2, diff[2] * inv_h2,
                                    dt, nsteps, react, neg_tol)
    return (uo[1:-1, 1:-1].copy(), vo[1:-1, 1:-1].copy(), wo[1:-1, 1:-1].copy(), failed, i, j)
