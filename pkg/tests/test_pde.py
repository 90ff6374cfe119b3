"""FTCS solver: conservation, boundary fidelity, Euler equivalence and refinement."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ecoepi.equilibria import select_equilibrium
from ecoepi.errors import NumericalError, ValidationError
from ecoepi.params import base_params, table3_params, turing_params
from ecoepi.pde import (FieldGrid, GridSpec, SnapshotSchedule, constant_fields, ftcs_step, ghost_padded,
                        initial_condition, simulate)
from ecoepi.temporal import euler_trajectory


def test_grid_defaults():
    g = GridSpec()
    assert (g.L, g.h, g.dt) == (math.pi, 0.01, 0.01)
    assert g.nx == g.ny == 315
    assert GridSpec.coarse().h == 0.02 and GridSpec.coarse().nx == 158


def test_stability_guard():
    g = GridSpec(h=0.01, dt=0.01)
    assert g.stability_number((1e-5, 1e-3, 1e-10)) == pytest.approx(0.4)
    with pytest.raises(ValidationError, match=r"max\(d\)\*dt\*4/h\^2"):
        GridSpec(h=0.01, dt=0.01, diffusion=(1e-5, 3e-3, 0.0))
    with pytest.raises(ValidationError):
        ftcs_step(constant_fields((1, 1, 1), g), base_params(d2=3e-3), g)


def test_grid_needs_three_nodes():
    with pytest.raises(ValidationError):
        GridSpec(L=1.0, h=0.9)
    with pytest.raises(ValidationError):
        GridSpec(h=-0.1)


def test_schedule_validation():
    with pytest.raises(ValidationError):
        SnapshotSchedule((5.0, 5.0))
    with pytest.raises(ValidationError):
        SnapshotSchedule(())
    with pytest.raises(ValidationError):
        SnapshotSchedule((0.005,)).validate(0.01)
    assert SnapshotSchedule((1.0, 2.5)).validate(0.01) == [100, 250]


def test_field_grid_checks():
    a = np.ones((3, 3))
    with pytest.raises(ValidationError):
        FieldGrid(a, a, np.ones((3, 4)), 0.0)
    with pytest.raises(ValidationError):
        FieldGrid(a, a, a * np.nan, 0.0)
    g = FieldGrid(a, a, a, 0.0)
    with pytest.raises(ValueError):
        g.u[0, 0] = 2.0


def test_initial_condition_nodes(eq_focus):
    g = GridSpec(L=math.pi, h=math.pi / 200)
    ic = initial_condition(eq_focus, g)
    assert ic.u[0, 0] == pytest.approx(eq_focus.u_star + 0.1, abs=1e-15)
    assert ic.v[10, 0] == pytest.approx(eq_focus.v_star, abs=1e-15)  # x = pi/20
    assert ic.w[0, 10] == pytest.approx(eq_focus.w_star, abs=1e-15)


def test_initial_condition_mean(eq_focus):
    ic = initial_condition(eq_focus, GridSpec())
    assert np.mean(ic.u - eq_focus.u_star) == pytest.approx(0.025, abs=2e-3)


def test_initial_condition_selected_fields(eq_focus):
    ic = initial_condition(eq_focus, GridSpec.coarse(), perturb=("u",))
    assert np.ptp(ic.v) == 0.0 and np.ptp(ic.u) > 0
    with pytest.raises(ValidationError):
        initial_condition(eq_focus, GridSpec.coarse(), perturb=("x",))


def test_equilibrium_is_fixed_point(eq_focus, row_a):
    g = GridSpec.coarse()
    f = constant_fields(eq_focus.state, g)
    out = ftcs_step(f, row_a, g)
    for name, a in out.items():
        assert np.max(np.abs(a - f.field(name))) < 1e-14


def test_pure_diffusion_conserves_mass(eq_focus):
    p = turing_params(d1=1e-3, d2=2e-3, d3=5e-4)
    g = GridSpec(h=0.02, dt=0.01, diffusion=p.diffusion)
    ic = initial_condition(eq_focus, g)
    out = simulate(p, None, g, SnapshotSchedule((10.0,)), initial=ic, react=False)[0][1]
    m0, m1 = ic.mass(g.h), out.mass(g.h)
    for f in m0:
        assert abs(m1[f] - m0[f]) / m0[f] < 1e-12
    assert np.ptp(out.v) < np.ptp(ic.v)


def test_ghost_difference_is_exactly_zero():
    rng = np.random.default_rng(0)
    a = rng.random((7, 9))
    p = ghost_padded(a)
    np.testing.assert_array_equal(p[0, 1:-1] - p[1, 1:-1], 0.0)
    np.testing.assert_array_equal(p[-1, 1:-1] - p[-2, 1:-1], 0.0)
    np.testing.assert_array_equal(p[1:-1, 0] - p[1:-1, 1], 0.0)
    np.testing.assert_array_equal(p[1:-1, -1] - p[1:-1, -2], 0.0)


@given(st.floats(0.5, 30), st.floats(0.5, 30), st.floats(0.5, 15), st.integers(1, 200))
def test_constant_field_equals_euler(u, v, w, n):
    p = table3_params("C")
    g = GridSpec(L=0.1, h=0.02)
    out = simulate(p, None, g, SnapshotSchedule((n * g.dt,)), initial=constant_fields((u, v, w), g))[0][1]
    ref = euler_trajectory(p, (u, v, w), g.dt, n)[-1]
    for a, r in zip((out.u, out.v, out.w), ref):
        assert np.max(np.abs(a - r)) <= 1e-12 * max(1.0, abs(r))


def test_zero_diffusion_run_matches_euler_at_snapshots():
    p = base_params()
    g = GridSpec(L=0.2, h=0.05)
    ic = constant_fields((5.0, 12.0, 4.0), g)
    hist = simulate(p, None, g, SnapshotSchedule((1.0, 2.5, 4.0)), initial=ic)
    ref = euler_trajectory(p, (5.0, 12.0, 4.0), g.dt, 400)
    for t, snap in hist:
        i = int(round(t / g.dt))
        np.testing.assert_allclose([snap.u[1, 1], snap.v[2, 3], snap.w[0, 4]], ref[i], rtol=1e-12)


def test_serial_is_deterministic_and_parallel_matches(row_a, eq_focus):
    g = GridSpec.coarse(diffusion=row_a.diffusion)
    sched = SnapshotSchedule((5.0,))
    a = simulate(row_a, eq_focus, g, sched, parallel=False)[0][1]
    b = simulate(row_a, eq_focus, g, sched, parallel=False)[0][1]
    c = simulate(row_a, eq_focus, g, sched, parallel=True)[0][1]
    for f in "uvw":
        np.testing.assert_array_equal(a.field(f), b.field(f))
        np.testing.assert_allclose(c.field(f), a.field(f), rtol=1e-12)


def test_negativity_aborts_with_node_and_time(row_a):
    g = GridSpec.coarse()
    u = np.full(g.shape, 5.0)
    u[3, 4] = -1.0
    bad = FieldGrid(u, np.full(g.shape, 10.0), np.full(g.shape, 5.0), 0.0)
    with pytest.raises(NumericalError, match=r"node \(3, 4\), t=0.01"):
        simulate(row_a, None, g, SnapshotSchedule((1.0,)), initial=bad)


def test_simulate_requires_initial_state(row_a):
    with pytest.raises(ValidationError):
        simulate(row_a, None, GridSpec.coarse(), SnapshotSchedule((1.0,)))


def test_snapshots_captured_in_order(row_a, eq_focus):
    g = GridSpec.coarse()
    seen = []
    hist = simulate(row_a, eq_focus, g, SnapshotSchedule((0.0, 0.5, 1.0)), progress=lambda t, s: seen.append(t))
    assert [t for t, _ in hist] == seen == [0.0, 0.5, 1.0]
    assert hist[0][1].u[0, 0] == pytest.approx(eq_focus.u_star + 0.1)


@pytest.mark.parametrize("row", ["A", "C", "E"])
def test_prey_stays_below_carrying_capacity(row):
    p = table3_params(row)
    g = GridSpec.coarse(diffusion=p.diffusion)
    hist = simulate(p, select_equilibrium(p), g, SnapshotSchedule(tuple(np.arange(20.0, 201.0, 20.0))))
    assert max(float(s.u.max()) for _, s in hist) <= p.k + 1e-6


def test_grid_refinement_order(row_a):
    """Halving h against an h/4 reference: error ratio in [3, 5] (relative L2 over the three fields)."""
    eq = select_equilibrium(row_a)

    def solve(n):
        g = GridSpec(L=math.pi, h=math.pi / n, dt=0.01, diffusion=row_a.diffusion)
        return simulate(row_a, eq, g, SnapshotSchedule((10.0,)), parallel=False)[0][1]

    coarse, mid, ref = solve(80), solve(160), solve(320)

    def err(sol, stride):
        num = sum(np.sum((sol.field(f) - ref.field(f)[::stride, ::stride]) ** 2) for f in "uvw")
        den = sum(np.sum(ref.field(f)[::stride, ::stride] ** 2) for f in "uvw")
        return math.sqrt(num / den)

    ratio = err(coarse, 4) / err(mid, 2)
    assert 3.0 <= ratio <= 5.0
