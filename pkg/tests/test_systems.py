"""Flux, entropy and eigenvalue maps of the built-in systems."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shockshift import (
    DomainBox,
    compatibility_check,
    entropy_quantities,
    extremal_eigenvalues,
    flux,
    make_system,
    reflect,
)
from shockshift.errors import (
    ConfigError,
    InvalidStateError,
    UndefinedEigenvalueError,
    VacuumGradientError,
)
from shockshift.systems import custom_system, entropy_hessian, flux_jacobian, replace

EULER_BOX = DomainBox({"rho": (0.1, 2.0), "u": (-2.0, 2.0), "e": (0.1, 2.0)})
ISEN_BOX = DomainBox({"rho": (0.1, 3.0), "u": (-3.0, 3.0)})


# -- flux -------------------------------------------------------------------


def test_burgers_flux(burgers_sys):
    assert flux(burgers_sys, 2.0)[0] == 4.0


def test_isentropic_flux_at_rest(isen_sys):
    np.testing.assert_allclose(flux(isen_sys, [1.0, 0.0]), [0.0, 1.0], atol=1e-15)


def test_euler_flux_at_rest(euler_sys):
    # e = 1, P = (gamma - 1) rho e
    np.testing.assert_allclose(flux(euler_sys, [1.0, 0.0, 1.0]), [0.0, 0.4, 0.0], atol=1e-15)


def test_euler_flux_against_primitive_formula(euler_sys, rng):
    rho, u, e = 1.3, -0.7, 0.9
    E = e + 0.5 * u**2
    p = 0.4 * rho * e
    expected = [rho * u, rho * u**2 + p, u * (rho * E + p)]
    np.testing.assert_allclose(flux(euler_sys, [rho, rho * u, rho * E]), expected, rtol=1e-14)


def test_flux_rejects_non_finite(burgers_sys, euler_sys):
    with pytest.raises(InvalidStateError):
        flux(burgers_sys, np.nan)
    with pytest.raises(InvalidStateError):
        flux(euler_sys, [1.0, np.inf, 1.0])


def test_flux_is_continuous_at_vacuum(isen_sys, euler_sys):
    np.testing.assert_array_equal(flux(isen_sys, [0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_array_equal(flux(euler_sys, [0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])
    small = flux(isen_sys, [1e-8, 1e-9])
    assert np.all(np.abs(small) <= 1e-8)


def test_negative_density_rejected(isen_sys):
    with pytest.raises(InvalidStateError):
        flux(isen_sys, [-0.1, 0.0])


# -- entropy ----------------------------------------------------------------


def test_burgers_entropy_triple(burgers_sys):
    eta, grad, G = entropy_quantities(burgers_sys, 2.0)
    assert float(eta) == pytest.approx(2.0)
    assert float(np.ravel(grad)[0]) == pytest.approx(2.0)
    assert float(G) == pytest.approx(16.0 / 3.0)


def test_euler_entropy_vanishes_at_unit_state(euler_sys):
    eta, _, _ = entropy_quantities(euler_sys, [1.0, 0.0, 1.0])
    assert abs(float(eta)) < 1e-15


def test_isentropic_entropy_at_rest(isen_sys):
    eta, _, _ = entropy_quantities(isen_sys, [1.0, 0.0])
    assert float(eta) == pytest.approx(1.0, abs=1e-14)


def test_entropy_gradient_refuses_vacuum(isen_sys, euler_sys):
    with pytest.raises(VacuumGradientError):
        entropy_quantities(isen_sys, [0.0, 0.0])
    with pytest.raises(VacuumGradientError):
        entropy_quantities(euler_sys, [0.0, 0.0, 0.0])
    eta, grad, G = entropy_quantities(euler_sys, [0.0, 0.0, 0.0], gradient=False)
    assert grad is None and float(eta) == 0.0 and float(G) == 0.0


@pytest.mark.parametrize("name", ["isentropic", "euler"])
def test_entropy_gradient_matches_finite_differences(name):
    system = make_system(name)
    box = ISEN_BOX if name == "isentropic" else EULER_BOX
    U = box.sample(system, 40, seed=3)
    _, grad, _ = entropy_quantities(system, U)
    h = 1e-6
    for j in range(system.m):
        e = np.zeros(system.m)
        e[j] = h
        fd = (system.entropy(U + e) - system.entropy(U - e)) / (2 * h)
        np.testing.assert_allclose(grad[:, j], fd, rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("name", ["burgers", "isentropic", "euler"])
def test_entropy_hessian_positive_definite(name):
    system = make_system(name)
    box = {"burgers": DomainBox({"u": (-2.0, 2.0)}), "isentropic": ISEN_BOX, "euler": EULER_BOX}[name]
    U = box.sample(system, 100, seed=0, interior_only=True)
    H = entropy_hessian(system, U)
    assert np.linalg.eigvalsh(0.5 * (H + np.swapaxes(H, -1, -2))).min() > 0


def test_maps_are_deterministic(euler_sys):
    U = EULER_BOX.sample(euler_sys, 50, seed=7)
    a = entropy_quantities(euler_sys, U)
    b = entropy_quantities(euler_sys, U.copy())
    for x, y in zip(a, b):
        assert x.tobytes() == y.tobytes()
    assert flux(euler_sys, U).tobytes() == flux(euler_sys, U).tobytes()


# -- eigenvalues ------------------------------------------------------------


def test_burgers_eigenvalues(burgers_sys):
    lo, hi = extremal_eigenvalues(burgers_sys, 1.0)
    assert (float(lo), float(hi)) == (2.0, 2.0)


def test_isentropic_eigenvalues(isen_sys):
    lo, hi = extremal_eigenvalues(isen_sys, [1.0, 0.0])
    np.testing.assert_allclose([lo, hi], [-np.sqrt(2), np.sqrt(2)], rtol=1e-14)


def test_euler_eigenvalues(euler_sys):
    lo, hi = extremal_eigenvalues(euler_sys, [1.0, 0.0, 1.0])
    np.testing.assert_allclose([lo, hi], [-np.sqrt(0.56), np.sqrt(0.56)], rtol=1e-14)


@pytest.mark.parametrize("name", ["isentropic", "euler"])
def test_eigenvalues_match_jacobian_spectrum(name):
    system = make_system(name)
    box = ISEN_BOX if name == "isentropic" else EULER_BOX
    U = box.sample(system, 30, seed=11)
    lo, hi = extremal_eigenvalues(system, U)
    lam = np.sort(np.linalg.eigvals(flux_jacobian(system, U)).real, axis=-1)
    np.testing.assert_allclose(lo, lam[:, 0], atol=1e-8)
    np.testing.assert_allclose(hi, lam[:, -1], atol=1e-8)
    assert np.all(lo <= hi)


def test_eigenvalues_undefined_at_vacuum(euler_sys):
    with pytest.raises(UndefinedEigenvalueError):
        extremal_eigenvalues(euler_sys, [0.0, 0.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50))
def test_scalar_eigenvalue_is_flux_derivative(u):
    system = make_system("burgers")
    lo, hi = extremal_eigenvalues(system, u)
    assert float(lo) == float(hi) == pytest.approx(2 * u)


# -- compatibility ----------------------------------------------------------


def test_burgers_compatibility(burgers_sys, rng):
    rep = compatibility_check(burgers_sys, rng.uniform(-2, 2, 100))
    assert rep.residual < 1e-10 and rep.passed


def test_corrupted_entropy_flux_fails(burgers_sys, rng):
    bad = replace(burgers_sys, entropy_flux=lambda U: burgers_sys.entropy_flux(U) + 0.01 * U[..., 0])
    rep = compatibility_check(bad, rng.uniform(-2, 2, 100))
    assert rep.residual >= 1e-3 and not rep.passed


def test_euler_compatibility(euler_sys):
    rep = compatibility_check(euler_sys, EULER_BOX.sample(euler_sys, 100, seed=0, interior_only=True))
    assert rep.residual < 1e-7


def test_isentropic_compatibility_other_gamma():
    system = make_system("isentropic", gamma=1.4)
    rep = compatibility_check(system, ISEN_BOX.sample(system, 100, seed=0, interior_only=True))
    assert rep.passed


def test_compatibility_needs_samples(burgers_sys):
    with pytest.raises(ConfigError):
        compatibility_check(burgers_sys, [])


def test_custom_system_uses_loose_threshold():
    # linear advection with eta = u^2/2, G = u^2/2 (speed 1)
    sys_ = custom_system(
        "advection",
        1,
        lambda U: U.copy(),
        lambda U: 0.5 * U[..., 0] ** 2,
        lambda U: 0.5 * U[..., 0] ** 2,
    )
    rep = compatibility_check(sys_, np.linspace(-1, 1, 20))
    assert rep.threshold == 1e-5 and rep.passed
    lo, hi = extremal_eigenvalues(sys_, 0.3)
    assert float(lo) == pytest.approx(1.0) and float(hi) == pytest.approx(1.0)


# -- selection, reflection, boxes -------------------------------------------


def test_make_system_rejects_unknown():
    with pytest.raises(ConfigError):
        make_system("mhd")
    with pytest.raises(ConfigError):
        make_system("burgers", gamma=2.0)
    with pytest.raises(ConfigError):
        make_system("isentropic", pressure="tait")


def test_reflection_negates_flux_and_swaps_eigenvalues(euler_sys):
    r = reflect(euler_sys)
    U = EULER_BOX.sample(euler_sys, 10, seed=1)
    np.testing.assert_array_equal(flux(r, U), -flux(euler_sys, U))
    lo, hi = extremal_eigenvalues(euler_sys, U)
    rlo, rhi = extremal_eigenvalues(r, U)
    np.testing.assert_array_equal(rlo, -hi)
    np.testing.assert_array_equal(rhi, -lo)
    assert compatibility_check(r, U).passed


def test_domain_box_sampling(euler_sys):
    U = EULER_BOX.sample(euler_sys, 64, seed=0)
    W = euler_sys.to_primitive(U)
    assert U.shape == (64, 3)
    assert np.all((W[:, 0] >= 0.1) & (W[:, 0] <= 2.0))
    assert np.all(np.abs(W[:, 1]) <= 2.0)
    np.testing.assert_array_equal(U, EULER_BOX.sample(euler_sys, 64, seed=0))


def test_domain_box_appends_vacuum(isen_sys):
    box = DomainBox({"rho": (0.0, 1.0), "u": (-1.0, 1.0)})
    U = box.sample(isen_sys, 16, seed=0)
    np.testing.assert_array_equal(U[-1], [0.0, 0.0])
    assert not np.any(np.all(box.sample(isen_sys, 16, seed=0, interior_only=True) == 0, axis=1))


def test_domain_box_validation(isen_sys):
    with pytest.raises(ConfigError):
        DomainBox({"rho": (0.0, 1.0)}).sample(isen_sys, 4)
    with pytest.raises(ConfigError):
        DomainBox({"rho": (-1.0, 1.0), "u": (0, 1)}).sample(isen_sys, 4)
