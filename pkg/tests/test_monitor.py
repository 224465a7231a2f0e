"""Dissipation, contraction, drift-bound and L2 verdicts."""

import numpy as np
import pytest

from shockshift import RunSeries, ShockTriple, build_contraction_config, contraction_verdict, dissipation_check, drift_bound_check, l2_stability_check, shift_velocity
from shockshift.constants import default_box, oa_membership
from shockshift.drift import TracePair
from shockshift.errors import ConfigError
from shockshift.monitor import dissipation_summary, l2_stability_constant, sandwich_summary

L, R = np.array([1.0]), np.array([-1.0])


@pytest.fixture(scope="module")
def cfg(burgers_sys):
    return build_contraction_config(burgers_sys, ShockTriple(L, R, 0.0))


def _pair(a, b):
    return TracePair(np.atleast_1d(np.asarray(a, float)), np.atleast_1d(np.asarray(b, float)), 2)


# -- dissipation ------------------------------------------------------------


def test_shock_traces_at_shock_speed(burgers_sys, cfg):
    assert dissipation_check(burgers_sys, cfg, _pair(L, R), 0.0) == 0.0


def test_constant_state_at_velocity_field(burgers_sys, cfg):
    box = default_box(burgers_sys, cfg.shock)
    U = box.sample(burgers_sys, 1000, seed=9)
    U = U[~oa_membership(burgers_sys, U, L, R, cfg.a)]
    V = shift_velocity(burgers_sys, U, cfg)
    D = [dissipation_check(burgers_sys, cfg, _pair(u, u), float(v)) for u, v in zip(U, V)]
    assert max(D) <= 1e-12


def test_burgers_state_two(burgers_sys, cfg):
    # the a-terms cancel: D = v (1/2 - 9a/2) - 3a - 5/3 + 9a = -1
    D = dissipation_check(burgers_sys, cfg, _pair(2.0, 2.0), shift_velocity(burgers_sys, 2.0, cfg))
    assert D == pytest.approx(-1.0, abs=1e-13)


def test_dissipation_is_pure(burgers_sys, cfg):
    tr = _pair(0.7, -0.8)
    assert dissipation_check(burgers_sys, cfg, tr, 0.1) == dissipation_check(burgers_sys, cfg, _pair(0.7, -0.8), 0.1)


def test_isentropic_constant_states(isen_sys):
    from shockshift import shock_curve

    c = shock_curve(isen_sys, [1.0, 0.0], s_max=0.5, n_points=51)
    sh = ShockTriple(c.base, c.states[-1], float(c.sigma[-1]))
    cfg = build_contraction_config(isen_sys, sh, n_samples=2000, n_bases=16, n_s=16)
    U = default_box(isen_sys, sh).sample(isen_sys, 1000, seed=2, interior_only=True)
    U = U[~oa_membership(isen_sys, U, sh.left, sh.right, cfg.a)]
    V = shift_velocity(isen_sys, U, cfg)
    D = np.array([dissipation_check(isen_sys, cfg, _pair(u, u), float(v)) for u, v in zip(U, V)])
    assert D.max() <= 1e-10


# -- contraction ------------------------------------------------------------


def test_decreasing_series_passes():
    v = contraction_verdict(np.linspace(1.0, 0.0, 50), 0.01, 1.0)
    assert v.passed and v.value == 0.0


def test_spike_fails():
    dx, T, C = 0.01, 2.0, 5.0
    Ea = np.full(50, 0.5)
    Ea[30] += 10 * C * dx * (1 + T)
    v = contraction_verdict(Ea, dx, T, C)
    assert not v.passed and v.value == pytest.approx(10 * C * dx * (1 + T), rel=1e-12)
    assert v.tolerance == pytest.approx(C * dx * (1 + T))


def test_rise_measured_from_running_minimum():
    v = contraction_verdict([1.0, 0.2, 0.5, 0.1, 0.3], 1.0, 0.0)
    assert v.value == pytest.approx(0.3)


def test_empty_series():
    with pytest.raises(ConfigError):
        contraction_verdict([], 0.1, 1.0)


# -- drift bound ------------------------------------------------------------


def test_linear_drift_fails():
    t = np.linspace(1.0, 10.0, 200)
    db = drift_bound_check(t, t, 1e-3)
    assert db.p == pytest.approx(1.0, abs=1e-10) and not db.passed


def test_sqrt_drift_passes():
    t = np.linspace(0.0, 10.0, 400)
    db = drift_bound_check(t, 0.3 * np.sqrt(t), 1e-3, U0_distance=0.6)
    assert db.p == pytest.approx(0.5, abs=1e-10) and db.passed
    assert db.constant == pytest.approx(0.5, rel=1e-10)


def test_subgrid_drift_is_vacuous():
    t = np.linspace(0.0, 10.0, 100)
    db = drift_bound_check(t, 1e-4 * np.ones_like(t), 1e-3)
    assert db.vacuous and db.passed and db.n_points == 0


def test_characteristics_drift_exponent():
    from shockshift import characteristics_drift_burgers

    res = characteristics_drift_burgers(0.1, 0.01, 100.0, 20_000)
    db = drift_bound_check(res.t, res.x, 1e-4)
    assert db.passed and db.p <= 0.55


# -- L2 stability -----------------------------------------------------------


def test_l2_constant_for_quadratic_entropy():
    for a in (0.002, 0.25, 0.9):
        assert l2_stability_constant(0.5, 0.5, a) == pytest.approx(1 / np.sqrt(a))


def test_pure_shock_l2_passes():
    v = l2_stability_check(np.zeros(10), 0.0, 0.5, 0.5, 0.01)
    assert v.passed


def test_l2_bound_edges():
    a, U0 = 0.01, 0.2
    K = 1 / np.sqrt(a)
    ok = l2_stability_check([U0, K * U0 * 1.04], U0, 0.5, 0.5, a)
    bad = l2_stability_check([U0, K * U0 * 1.06], U0, 0.5, 0.5, a)
    assert ok.passed and not bad.passed


def test_injected_growth_fails():
    series = 0.1 * np.exp(np.linspace(0, 8, 100))
    assert not l2_stability_check(series, 0.1, 0.5, 0.5, 0.01).passed


# -- summaries and the series container -------------------------------------


def test_dissipation_summary_threshold():
    Dt = np.zeros(10_000)
    Dt[:9] = 1.0
    assert dissipation_summary(Dt, 0.5).passed
    Dt[:10] = 1.0
    assert not dissipation_summary(Dt, 0.5).passed


def test_sandwich_summary():
    xd = np.array([0.5, 1.0, 2.0 + 5e-9])
    v = sandwich_summary(xd, np.zeros(3), 2 * np.ones(3))
    assert v.passed and v.flags["violations"] == 0
    v = sandwich_summary(np.array([3.0]), np.zeros(1), np.ones(1))
    assert not v.passed


def test_run_series_rows():
    s = RunSeries()
    s.append(t=0, Ea=1, l2_dist=2, x=0, xdot=1, vmin=0, vmax=2, Dt=0)
    s.append(t=1, Ea=0.5, l2_dist=1, x=1, xdot=1, vmin=0, vmax=2, Dt=0)
    assert len(s) == 2 and list(s.rows())[1][:2] == (1.0, 0.5)
    with pytest.raises(ConfigError):
        s.append(t=2)
