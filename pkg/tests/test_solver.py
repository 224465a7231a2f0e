"""Numerical fluxes, conservative stepping and initial data."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shockshift import FieldSnapshot, Grid1D, PseudoNormConfig, SolverConfig, initial_data, make_system, pseudo_norm, riemann_flux, step
from shockshift.errors import ConfigError, InvalidStateError, ParameterError
from shockshift.solver import cell_averages, profile_l2_distance, stable_dt, write_snapshot
from shockshift.systems import flux


def _run(system, fld, cfg):
    while fld.time < cfg.T - 1e-14:
        fld = step(system, fld, cfg)
    return fld


# -- fluxes -----------------------------------------------------------------


def test_godunov_values(burgers_sys):
    assert riemann_flux(burgers_sys, 1.0, -1.0)[0] == 1.0
    assert riemann_flux(burgers_sys, -1.0, 1.0)[0] == 0.0
    # supersonic cases pick the upwind flux
    assert riemann_flux(burgers_sys, 2.0, 1.0)[0] == 4.0
    assert riemann_flux(burgers_sys, -2.0, -1.0)[0] == 1.0


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_godunov_formula(ul, ur):
    system = make_system("burgers")
    got = float(riemann_flux(system, ul, ur)[0])
    s = np.linspace(min(ul, ur), max(ul, ur), 2001)
    s = np.append(s, 0.0) if min(ul, ur) < 0 < max(ul, ur) else s
    expected = np.min(s**2) if ul <= ur else np.max(s**2)
    assert got == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "name,U",
    [("burgers", [0.7]), ("isentropic", [1.3, -0.4]), ("euler", [0.9, 0.2, 2.1])],
)
@pytest.mark.parametrize("scheme", [None, "rusanov"])
def test_flux_consistency(name, U, scheme):
    system = make_system(name)
    if name == "burgers" and scheme is None:
        scheme = "godunov"
    np.testing.assert_allclose(riemann_flux(system, U, U, scheme), flux(system, U), rtol=1e-14, atol=1e-15)


def test_hll_on_euler(euler_sys):
    U = [0.9, 0.2, 2.1]
    np.testing.assert_allclose(riemann_flux(euler_sys, U, U, "hll"), flux(euler_sys, U), rtol=1e-14)


def test_hllc_resolves_stationary_contact(euler_sys):
    # equal pressure and zero velocity: HLLC keeps the contact exact
    W = np.array([[1.0, 0.0, 1.0], [0.5, 0.0, 2.0]])
    L, R = euler_sys.from_primitive(W)
    np.testing.assert_allclose(riemann_flux(euler_sys, L, R), [0.0, 0.4, 0.0], atol=1e-14)


def test_vacuum_flux_is_finite(isen_sys, euler_sys):
    F = riemann_flux(isen_sys, [0.0, 0.0], [1.0, 0.0])
    assert np.all(np.isfinite(F))
    F = riemann_flux(euler_sys, [0.0, 0.0, 0.0], [1.0, 0.0, 1.0])
    assert np.all(np.isfinite(F))


def test_flux_rejects_nan(euler_sys):
    with pytest.raises(InvalidStateError):
        riemann_flux(euler_sys, [np.nan, 0, 1], [1.0, 0.0, 1.0])


def test_scheme_checks(isen_sys):
    with pytest.raises(ConfigError):
        riemann_flux(isen_sys, [1.0, 0.0], [1.0, 0.0], "godunov")
    with pytest.raises(ConfigError):
        riemann_flux(isen_sys, [1.0, 0.0], [1.0, 0.0], "hllc")
    with pytest.raises(ConfigError):
        SolverConfig(T=1.0, cfl=1.5)
    with pytest.raises(ConfigError):
        SolverConfig(T=1.0, boundary="reflective")


# -- stepping ---------------------------------------------------------------


@pytest.mark.parametrize("name,U", [("burgers", [0.3]), ("isentropic", [1.2, 0.3]), ("euler", [1.0, 0.1, 1.7])])
def test_constant_field_unchanged(name, U):
    system = make_system(name)
    grid = Grid1D(0.0, 1.0, 32)
    fld = FieldSnapshot(0.0, grid, np.tile(U, (32, 1)))
    cfg = SolverConfig(T=1.0, left_state=np.array(U), right_state=np.array(U))
    nxt = step(system, fld, cfg)
    assert nxt.cells.tobytes() == fld.cells.tobytes()


def test_aligned_steady_shock_unchanged(burgers_sys):
    grid = Grid1D(-1.0, 1.0, 40)
    fld = initial_data(burgers_sys, "pure_shock", {"offset": 0.0}, grid, [1.0], [-1.0])
    cfg = SolverConfig(T=1.0, left_state=np.array([1.0]), right_state=np.array([-1.0]))
    out = _run(burgers_sys, fld, cfg)
    np.testing.assert_array_equal(out.cells, fld.cells)


def test_periodic_mass_conservation(burgers_sys):
    grid = Grid1D(0.0, 1.0, 128)
    cells = cell_averages(lambda x: 0.5 + 0.3 * np.sin(2 * np.pi * x), grid)
    fld = FieldSnapshot(0.0, grid, cells)
    cfg = SolverConfig(T=10.0, boundary="periodic")
    m0 = fld.cells.sum() * grid.dx
    for _ in range(100):
        fld = step(burgers_sys, fld, cfg)
        assert abs(fld.cells.sum() * grid.dx - m0) < 1e-12 * max(1.0, abs(m0))


def test_periodic_euler_conservation(euler_sys):
    grid = Grid1D(0.0, 1.0, 64)
    x = grid.centers
    W = np.column_stack([1 + 0.2 * np.sin(2 * np.pi * x), 0.3 * np.cos(2 * np.pi * x), 1 + 0.1 * np.sin(4 * np.pi * x)])
    fld = FieldSnapshot(0.0, grid, euler_sys.from_primitive(W))
    cfg = SolverConfig(T=10.0, boundary="periodic")
    m0 = fld.cells.sum(axis=0)
    for _ in range(100):
        fld = step(euler_sys, fld, cfg)
    np.testing.assert_allclose(fld.cells.sum(axis=0), m0, rtol=1e-12, atol=1e-12)


def test_burgers_entropy_nonincreasing(burgers_sys):
    grid = Grid1D(0.0, 1.0, 200)
    fld = FieldSnapshot(0.0, grid, cell_averages(lambda x: np.sin(2 * np.pi * x), grid))
    cfg = SolverConfig(T=10.0, boundary="periodic")
    ent = [0.5 * np.sum(fld.cells**2) * grid.dx]
    for _ in range(300):
        fld = step(burgers_sys, fld, cfg)
        ent.append(0.5 * np.sum(fld.cells**2) * grid.dx)
    assert np.all(np.diff(ent) <= 1e-14)


def test_refinement_halves_l1_error(burgers_sys):
    # moving shock 1 -> 0 at speed 1
    errs = []
    for n in (200, 400):
        grid = Grid1D(-2.0, 3.0, n)
        cfg = SolverConfig(T=1.0, left_state=np.array([1.0]), right_state=np.array([0.0]))
        out = _run(burgers_sys, initial_data(burgers_sys, "pure_shock", {}, grid, [1.0], [0.0]), cfg)
        exact = cell_averages(lambda x: np.where(x < 1.0, 1.0, 0.0), grid, (1.0,))
        errs.append(np.sum(np.abs(out.cells - exact)) * grid.dx)
    assert 0.35 <= errs[1] / errs[0] <= 0.65


def test_stable_dt_respects_cfl_and_end(euler_sys):
    grid = Grid1D(0.0, 1.0, 50)
    fld = FieldSnapshot(0.0, grid, np.tile([1.0, 0.0, 1.0], (50, 1)))
    dt = stable_dt(euler_sys, fld, SolverConfig(T=1.0))
    assert dt == pytest.approx(0.45 * grid.dx / np.sqrt(0.56))
    assert stable_dt(euler_sys, fld, SolverConfig(T=1e-6)) == pytest.approx(1e-6)


def test_nan_aborts(burgers_sys):
    grid = Grid1D(0.0, 1.0, 16)
    fld = FieldSnapshot(0.0, grid, np.zeros(16))
    with pytest.raises(InvalidStateError):
        step(burgers_sys, fld, SolverConfig(T=1.0, left_state=np.array([np.inf])), dt=0.01)


def test_vacuum_riemann_problem_runs(isen_sys):
    grid = Grid1D(-1.0, 1.0, 100)
    W = np.where(grid.centers[:, None] < 0, [1.0, 0.0], [0.0, 0.0])
    fld = FieldSnapshot(0.0, grid, isen_sys.from_primitive(W))
    out = _run(isen_sys, fld, SolverConfig(T=0.2))
    assert np.all(out.cells[:, 0] >= 0) and np.all(np.isfinite(out.cells))


# -- initial data -----------------------------------------------------------


def test_prop14_l2_norm(burgers_sys):
    grid = Grid1D(-50.0, 5.0, 2000)
    d = profile_l2_distance(burgers_sys, "prop14", {"r": 0.1, "eps": 0.01}, grid)
    assert 0.0099 <= d**2 <= 0.0101


@pytest.mark.parametrize("r", [0.0, 0.5, 0.7, -0.1])
def test_prop14_rejects_r(burgers_sys, r):
    with pytest.raises(ParameterError):
        initial_data(burgers_sys, "prop14", {"r": r, "eps": 0.01}, Grid1D(-1, 1, 16))


def test_prop14_profile_values(burgers_sys):
    grid = Grid1D(-1.0, 1.0, 1000)
    fld = initial_data(burgers_sys, "prop14", {"r": 0.1, "eps": 0.01}, grid)
    assert np.all(fld.cells[grid.centers > 0] == -1.0)
    left = fld.cells[grid.centers < 0, 0]
    assert np.all(left > 1.0) and np.all(np.diff(left) > 0)


def test_zero_bump_equals_pure_shock(euler_sys):
    grid = Grid1D(-2.0, 2.0, 64)
    L, R = [1.0, 0.0, 1.0], [1.5, -0.3, 1.4]
    a = initial_data(euler_sys, "shock_plus_bump", {"amplitude": 0.0, "width": 0.5, "center": -1.0}, grid, L, R)
    b = initial_data(euler_sys, "pure_shock", {}, grid, L, R)
    assert a.cells.tobytes() == b.cells.tobytes()


def test_pure_shock_has_zero_norm(burgers_sys):
    grid = Grid1D(-1.0, 1.0, 40)
    fld = initial_data(burgers_sys, "pure_shock", {"offset": 0.0}, grid, [1.0], [-1.0])
    assert pseudo_norm(burgers_sys, fld, PseudoNormConfig(np.array([1.0]), np.array([-1.0]), 0.1, 0.0)) == 0.0


def test_offset_step_averages(burgers_sys):
    grid = Grid1D(0.0, 1.0, 10)
    fld = initial_data(burgers_sys, "pure_shock", {"offset": 0.25}, grid, [1.0], [-1.0])
    assert fld.cells[2, 0] == pytest.approx(0.0, abs=1e-14)


def test_bump_l2_matches_integral(burgers_sys):
    # cos^2 bump of height A and half-width w: L2^2 = A^2 * 3w/4
    grid = Grid1D(-5.0, 5.0, 1000)
    d = profile_l2_distance(burgers_sys, "shock_plus_bump", {"amplitude": 0.3, "width": 0.5, "center": -1.0}, grid, [1.0], [-1.0])
    assert d**2 == pytest.approx(0.09 * 0.375, rel=1e-10)


def test_random_perturbation_is_reproducible(isen_sys):
    grid = Grid1D(-2.0, 2.0, 64)
    p = {"seed": 4, "amplitude": 0.05, "support": [-1.5, -0.5]}
    a = initial_data(isen_sys, "random_perturbation", p, grid, [1.0, 0.0], [1.5, -0.5])
    b = initial_data(isen_sys, "random_perturbation", p, grid, [1.0, 0.0], [1.5, -0.5])
    assert a.cells.tobytes() == b.cells.tobytes()
    outside = (grid.edges[1:] <= -1.5) | ((grid.edges[:-1] >= -0.5) & (grid.edges[1:] <= 0.0))
    np.testing.assert_allclose(a.cells[outside], [[1.0, 0.0]] * int(outside.sum()), atol=1e-15)


def test_unknown_kind(burgers_sys):
    with pytest.raises(ConfigError):
        initial_data(burgers_sys, "gaussian", {}, Grid1D(0, 1, 8), [1.0], [-1.0])


def test_snapshot_csv(tmp_path, euler_sys):
    grid = Grid1D(0.0, 1.0, 8)
    fld = FieldSnapshot(0.0, grid, np.tile([1.0, 0.0, 1.0], (8, 1)))
    path = write_snapshot(euler_sys, fld, tmp_path / "snap_0.csv")
    rows = path.read_text().splitlines()
    assert rows[0] == "x_center,rho,rho_u,rho_E" and len(rows) == 9
