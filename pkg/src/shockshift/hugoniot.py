"""Rankine-Hugoniot curves and the dissipation identities along them.

A 1-shock curve from a base state ``U`` is a family ``s -> (S_U(s), sigma_U(s))``
with ``A(S) - A(U) = sigma (S - U)``, ``S_U(0) = U`` and
``sigma_U(0) = lambda_min(U)``. For the built-in Euler systems the curve is
traced by Newton continuation with the parameter ``s = |S_U(s) - U|``
(Euclidean distance in conserved variables); Burgers uses the closed form
``S = u - s``, ``sigma = 2u - s`` which has the same parameterisation.

The n-family is handled by the same machinery with ``lambda_max``; it is
also reachable through :func:`shockshift.systems.reflect`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    AccuracyError,
    ConfigError,
    ContinuationError,
    InvalidStateError,
    OutOfRangeError,
)
from .relent import rel_entropy, rel_flux
from .systems import SystemDescriptor, check_states, flux_jacobian

RH_TOL = 1e-10


@dataclass(frozen=True)
class ShockTriple:
    left: np.ndarray
    right: np.ndarray
    sigma: float

    def validate(self, system: SystemDescriptor, tol: float = RH_TOL) -> None:
        """Raise :class:`ConfigError` unless RH and the entropy inequality hold."""
        res, prod = rh_residual(system, self.left, self.right, self.sigma)
        scale = _rh_scale(system, self.left, self.right, self.sigma)
        if np.max(np.abs(res)) > tol * scale:
            raise ConfigError(f"Rankine-Hugoniot residual {np.max(np.abs(res)):.3e} exceeds tolerance")
        if prod > tol * scale:
            raise ConfigError(f"discontinuity produces entropy ({prod:.3e} > 0)")


def _rh_scale(system, left, right, sigma) -> float:
    A = system.flux(np.stack([np.asarray(left, float), np.asarray(right, float)]))
    jump = np.asarray(right, float) - np.asarray(left, float)
    return float(max(1.0, np.max(np.abs(A)), abs(sigma) * np.max(np.abs(jump))))


def rh_residual(system: SystemDescriptor, left, right, sigma: float):
    """``(A(R) - A(L) - sigma (R - L), G(R) - G(L) - sigma (eta(R) - eta(L)))``.

    The second value is the entropy production; the jump is admissible when
    it is ``<= 0``.
    """
    L = check_states(system, left)
    R = check_states(system, right)
    residual = system.flux(R) - system.flux(L) - sigma * (R - L)
    production = system.entropy_flux(R) - system.entropy_flux(L) - sigma * (system.entropy(R) - system.entropy(L))
    return residual, float(production)


# ---------------------------------------------------------------------------
# shock curves


@dataclass
class ShockCurve:
    """Sampled shock curve with exact derivatives at the nodes.

    ``states[k]`` and ``sigma[k]`` are ``S(s[k])`` and ``sigma(s[k])``;
    ``dstates``/``dsigma`` are their ``s``-derivatives, used for piecewise
    cubic Hermite interpolation.
    """

    system: SystemDescriptor = field(repr=False)
    base: np.ndarray
    family: int
    s: np.ndarray
    states: np.ndarray
    sigma: np.ndarray
    dstates: np.ndarray
    dsigma: np.ndarray

    def __post_init__(self):
        self._state_spline = CubicHermiteSpline(self.s, self.states, self.dstates, axis=0)
        self._sigma_spline = CubicHermiteSpline(self.s, self.sigma, self.dsigma)

    @property
    def s_max(self) -> float:
        return float(self.s[-1])

    def _check_range(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < -1e-14) or np.any(s > self.s_max * (1 + 1e-12)):
            raise OutOfRangeError(f"curve parameter outside [0, {self.s_max}]")
        return np.clip(s, 0.0, self.s_max)

    def state_at(self, s):
        return self._state_spline(self._check_range(s))

    def sigma_at(self, s):
        return self._sigma_spline(self._check_range(s))

    def exact(self, s: float):
        """Newton-polished ``(S, sigma, dS/ds, dsigma/ds)`` at ``s``."""
        s = float(self._check_range(s))
        if self.system.name == "burgers":
            return _burgers_point(self.base, s, self.family)
        if s == 0.0:
            return self.states[0].copy(), float(self.sigma[0]), self.dstates[0].copy(), float(self.dsigma[0])
        return _rh_newton(self.system, self.base, s, self.state_at(s), float(self.sigma_at(s)))

    def pair(self, k: int):
        """``(left, right)`` of the discontinuity at node ``k``."""
        if self.family == 1:
            return self.base, self.states[k]
        return self.states[k], self.base


def _burgers_point(base, s, family):
    u = float(np.asarray(base).reshape(-1)[0])
    sign = -1.0 if family == 1 else 1.0
    return np.array([u + sign * s]), 2.0 * u + sign * s, np.array([sign]), sign


def _augmented(system, base, W, sig, s):
    d = W - base
    m = system.m
    res = np.empty(m + 1)
    res[:m] = system.flux(W) - system.flux(base) - sig * d
    res[m] = 0.5 * (d @ d - s * s)
    jac = np.zeros((m + 1, m + 1))
    jac[:m, :m] = flux_jacobian(system, W) - sig * np.eye(m)
    jac[:m, m] = -d
    jac[m, :m] = d
    return res, jac


def _rh_newton(system, base, s, W0, sig0, tol=1e-14, max_iter=60):
    """Solve RH plus ``|W - base| = s`` for ``(W, sigma)`` from a starting guess."""
    W = np.array(W0, dtype=float)
    sig = float(sig0)
    m = system.m
    scale = max(1.0, float(np.max(np.abs(system.flux(base)))))
    for _ in range(max_iter):
        if not np.all(system.interior(W)):
            raise ContinuationError("Newton iterate left the interior domain", None)
        res, jac = _augmented(system, base, W, sig, s)
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ContinuationError(f"singular Newton system: {exc}", None) from exc
        W = W + step[:m]
        sig += step[m]
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(W)), abs(sig)):
            res, jac = _augmented(system, base, W, sig, s)
            if np.max(np.abs(res[:m])) <= RH_TOL * scale:
                rhs = np.zeros(m + 1)
                rhs[m] = s
                tangent = np.linalg.solve(jac, rhs)
                return W, sig, tangent[:m], float(tangent[m])
    raise ContinuationError(f"Newton did not converge at s={s}", None)


def _initial_tangent(system, base, family):
    J = flux_jacobian(system, base)
    lam, vecs = np.linalg.eig(J)
    lam = lam.real
    k = int(np.argmin(lam)) if family == 1 else int(np.argmax(lam))
    r = vecs[:, k].real
    r = r / np.linalg.norm(r)
    h = 1e-5

    def ext(U):
        lo, hi = system.eigenvalues(U)
        return float(lo if family == 1 else hi)

    dlam = (ext(base + h * r) - ext(base - h * r)) / (2 * h)
    if abs(dlam) < 1e-12:
        raise ContinuationError("characteristic field is degenerate at the base state", 0.0)
    dsig = 0.5 * dlam
    want_negative = family == 1
    if (dsig < 0) != want_negative:
        r, dsig = -r, -dsig
    return lam[k], r, dsig


def shock_curve(system: SystemDescriptor, base, family: int = 1, s_max: float = 1.0, n_points: int = 101) -> ShockCurve:
    """Sample the 1-shock (``family=1``) or n-shock (``family="n"``/``-1``) curve.

    Returns ``n_points`` equally spaced parameters on ``[0, s_max]``. Every
    point is checked for the RH residual and for admissibility.
    """
    family = _family(family)
    base = check_states(system, base, interior=True).reshape(system.m).copy()
    if n_points < 2:
        raise ConfigError("a shock curve needs at least 2 points")
    if not s_max > 0:
        raise ConfigError("s_max must be positive")
    s = np.linspace(0.0, float(s_max), int(n_points))
    m = system.m
    states = np.empty((len(s), m))
    sig = np.empty(len(s))
    dstates = np.empty((len(s), m))
    dsig = np.empty(len(s))

    if system.name == "burgers":
        for k, sk in enumerate(s):
            states[k], sig[k], dstates[k], dsig[k] = _burgers_point(base, sk, family)
    else:
        lam, r, ds0 = _initial_tangent(system, base, family)
        states[0], sig[0], dstates[0], dsig[0] = base, lam, r, ds0
        for k in range(1, len(s)):
            try:
                out = _continue(system, base, s[k - 1], s[k], states[k - 1], sig[k - 1], dstates[k - 1], dsig[k - 1])
            except ContinuationError as exc:
                raise ContinuationError(f"shock curve continuation failed: {exc}", float(s[k - 1])) from exc
            states[k], sig[k], dstates[k], dsig[k] = out

    curve = ShockCurve(system, base, family, s, states, sig, dstates, dsig)
    _validate_curve(system, curve)
    return curve


def _continue(system, base, s_prev, s_next, W, sig, dW, dsig, depth=0):
    h = s_next - s_prev
    try:
        out = _rh_newton(system, base, s_next, W + h * dW, sig + h * dsig)
    except ContinuationError:
        out = None
    if out is not None and abs(np.linalg.norm(out[0] - W) - abs(h)) <= 0.5 * abs(h) + 1e-12:
        if (out[1] - sig) * dsig >= 0 or abs(out[1] - sig) < 1e-13:
            return out
    if depth >= 12:
        raise ContinuationError(f"step refinement exhausted near s={s_prev}", s_prev)
    mid = 0.5 * (s_prev + s_next)
    Wm, sm, dWm, dsm = _continue(system, base, s_prev, mid, W, sig, dW, dsig, depth + 1)
    return _continue(system, base, mid, s_next, Wm, sm, dWm, dsm, depth + 1)


def _validate_curve(system, curve):
    for k in range(len(curve.s)):
        left, right = curve.pair(k)
        res, prod = rh_residual(system, left, right, curve.sigma[k])
        scale = _rh_scale(system, left, right, curve.sigma[k])
        if np.max(np.abs(res)) > RH_TOL * scale or prod > RH_TOL * scale:
            raise ContinuationError(
                f"curve point s={curve.s[k]} fails RH/admissibility (res={np.max(np.abs(res)):.2e}, prod={prod:.2e})",
                float(curve.s[k - 1]) if k else 0.0,
            )
    if np.any(np.diff(curve.s) <= 0):
        raise ContinuationError("curve parameter is not increasing", None)


def _family(family) -> int:
    if family in (1, "1"):
        return 1
    if family in (-1, "n", "N", "-1"):
        return -1
    raise ConfigError(f"family must be 1 or 'n', got {family!r}")


def reflected_curve(system: SystemDescriptor, reflected_curve_1: ShockCurve) -> ShockCurve:
    """Map a 1-curve of the reflected system to the n-curve of ``system``."""
    c = reflected_curve_1
    return ShockCurve(system, c.base, -1, c.s.copy(), c.states.copy(), -c.sigma, c.dstates.copy(), -c.dsigma)


# ---------------------------------------------------------------------------
# admissibility audits


@dataclass
class LiuReport:
    liu_margin: np.ndarray
    strengthen_margin: np.ndarray

    @property
    def liu_pass(self) -> bool:
        return bool(np.all(self.liu_margin[1:-1] > 0))

    @property
    def strengthen_pass(self) -> bool:
        return bool(np.all(self.strengthen_margin[1:-1] > 0))

    @property
    def passed(self) -> bool:
        return self.liu_pass and self.strengthen_pass


def liu_strengthen_check(system: SystemDescriptor, curve: ShockCurve) -> LiuReport:
    """Finite-difference audit of the Liu and strengthening conditions.

    ``liu_margin`` is ``-sigma'`` for the 1-family (``sigma'`` for the
    n-family) and ``strengthen_margin`` is ``d/ds eta(U | S_U(s))``; both must
    be positive at the interior samples.
    """
    if len(curve.s) < 3:
        raise ConfigError("liu_strengthen_check needs at least 3 samples")
    dsig = np.gradient(curve.sigma, curve.s)
    strength = rel_entropy(system, curve.base, curve.states)
    dstrength = np.gradient(strength, curve.s)
    liu = -dsig if curve.family == 1 else dsig
    return LiuReport(liu, dstrength)


def lax_audit(system: SystemDescriptor, curve: ShockCurve) -> float:
    """Smallest margin of the Lax inequalities along a curve (positive = satisfied).

    For the 1-family: ``lambda_min(S) < sigma < lambda_min(U)`` at ``s > 0``.
    """
    lo_b, hi_b = system.eigenvalues(curve.base)
    lo, hi = system.eigenvalues(curve.states[1:])
    sig = curve.sigma[1:]
    if curve.family == 1:
        margins = np.minimum(sig - lo, lo_b - sig)
    else:
        margins = np.minimum(hi - sig, sig - hi_b)
    return float(np.min(margins))


# ---------------------------------------------------------------------------
# dissipation identities


def _quad(fn, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(fn, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        except integrate.IntegrationWarning as exc:
            raise AccuracyError(f"quadrature failed on [{a}, {b}]: {exc}") from exc
    return val


def _curve_for(system, base, s_needed, curve, n_points=201):
    if curve is None:
        curve = shock_curve(system, base, 1, max(float(s_needed), 1e-8), n_points)
    if s_needed > curve.s_max * (1 + 1e-12) or s_needed < 0:
        raise OutOfRangeError(f"s={s_needed} outside the curve range [0, {curve.s_max}]")
    return curve


@dataclass
class IdentityResult:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def lax_dissipation_identity(system: SystemDescriptor, base, s: float, V, curve: Optional[ShockCurve] = None) -> IdentityResult:
    """Entropy loss along a 1-shock curve, computed two ways.

    ``lhs = F(S(s), V) - sigma(s) eta(S(s)|V)`` and
    ``rhs = F(U, V) - sigma(s) eta(U|V) + int_0^s sigma'(t) eta(U|S(t)) dt``
    with adaptive quadrature on Newton-polished curve points.
    """
    base = check_states(system, base, interior=True).reshape(system.m)
    V = check_states(system, V, interior=True).reshape(system.m)
    if s == 0:
        # zero-strength jump: both sides are the same expression
        lo, _ = system.eigenvalues(base)
        sig = float(lo)
        val = float(rel_flux(system, base, V) - sig * rel_entropy(system, base, V))
        return IdentityResult(val, val)
    curve = _curve_for(system, base, s, curve)
    S, sig, _, _ = curve.exact(s)
    lhs = float(rel_flux(system, S, V) - sig * rel_entropy(system, S, V))

    def integrand(t):
        St, _, _, dsig = curve.exact(t)
        return dsig * float(rel_entropy(system, base, St))

    integral = _quad(integrand, 0.0, s)
    rhs = float(rel_flux(system, base, V) - sig * rel_entropy(system, base, V)) + integral
    return IdentityResult(lhs, rhs)


def lax_dissipation_inequality(system: SystemDescriptor, triple: ShockTriple, V):
    """Inequality form for an arbitrary admissible jump; returns ``(lhs, rhs, holds)``.

    ``F(U+, V) - sigma eta(U+|V) <= F(U-, V) - sigma eta(U-|V)``.
    """
    triple.validate(system)
    V = check_states(system, V, interior=True)
    lhs = float(rel_flux(system, triple.right, V) - triple.sigma * rel_entropy(system, triple.right, V))
    rhs = float(rel_flux(system, triple.left, V) - triple.sigma * rel_entropy(system, triple.left, V))
    return lhs, rhs, lhs <= rhs + 1e-12 * max(1.0, abs(rhs))


@dataclass
class DiPernaResult:
    D: float
    D_integral: float
    kappa: float
    delta: float


def _dissipation_direct(system, S, sig, S0):
    return float(rel_flux(system, S, S0) - sig * rel_entropy(system, S, S0))


def kappa_delta(system: SystemDescriptor, curve: ShockCurve, s0: float, s_grid=None):
    """Largest sampled ``kappa`` (and its ``delta``) such that

    ``D(s) <= -kappa |dsigma|^2`` for ``|s - s0| <= delta`` and
    ``D(s) <= -kappa |dsigma|`` for ``|s - s0| >= delta``

    with ``D(s) = F(S(s), S(s0)) - sigma(s) eta(S(s)|S(s0))``. Returns
    ``(kappa, delta)``; ``kappa <= 0`` means the sampled data refute it.
    """
    if s_grid is None:
        s_grid = curve.s
    s_grid = np.asarray(s_grid, dtype=float)
    s_grid = s_grid[np.abs(s_grid - s0) > 1e-12 * max(1.0, s0)]
    S0 = curve.state_at(s0)
    sig0 = float(curve.sigma_at(s0))
    S = curve.state_at(s_grid)
    sig = curve.sigma_at(s_grid)
    D = rel_flux(system, S, S0) - sig * rel_entropy(system, S, S0)
    dsig = np.abs(sig - sig0)
    dist = np.abs(s_grid - s0)
    best = (-np.inf, 0.0)
    span = max(float(dist.max()), 1e-12)
    for frac in np.linspace(0.02, 1.0, 50):
        delta = frac * min(span, s0 if s0 > 0 else span)
        near = dist <= delta
        cands = []
        if np.any(near):
            cands.append(np.min(-D[near] / dsig[near] ** 2))
        if np.any(~near):
            cands.append(np.min(-D[~near] / dsig[~near]))
        kappa = float(min(cands))
        if kappa > best[0]:
            best = (kappa, float(delta))
    return best


def diperna_dissipation(
    system: SystemDescriptor,
    base,
    s: float,
    s0: float,
    curve: Optional[ShockCurve] = None,
    sweep=None,
) -> DiPernaResult:
    """Dissipation of the jump ``(S(s), S(s0))`` at speed ``sigma(s)`` along one curve.

    ``D`` is evaluated directly, ``D_integral`` as
    ``int_{s0}^{s} sigma'(t) (eta(U|S(t)) - eta(U|S(s0))) dt``; ``kappa`` and
    ``delta`` come from :func:`kappa_delta` on ``sweep`` (default: the curve
    nodes).
    """
    base = check_states(system, base, interior=True).reshape(system.m)
    if curve is None:
        top = max(s, s0)
        if sweep is not None:
            top = max(top, float(np.max(sweep)))
        curve = shock_curve(system, base, 1, top, 201)
    if not (0 <= s0 <= curve.s_max * (1 + 1e-12)):
        raise OutOfRangeError(f"s0={s0} outside the curve range [0, {curve.s_max}]")
    if not (0 <= s <= curve.s_max * (1 + 1e-12)):
        raise OutOfRangeError(f"s={s} outside the curve range [0, {curve.s_max}]")
    S, sig, _, _ = curve.exact(s)
    S0, _, _, _ = curve.exact(s0)
    D = _dissipation_direct(system, S, sig, S0) if s != s0 else 0.0
    h0 = float(rel_entropy(system, base, S0))

    def integrand(t):
        St, _, _, dsig = curve.exact(t)
        return dsig * (float(rel_entropy(system, base, St)) - h0)

    D_int = _quad(integrand, s0, s) if s != s0 else 0.0
    kappa, delta = kappa_delta(system, curve, s0, sweep)
    return DiPernaResult(D, D_int, kappa, delta)


def locate_on_curve(system: SystemDescriptor, left, right, sigma: float, tol: float = 1e-8) -> float:
    """Parameter ``s0`` with ``right = S_left(s0)`` on the 1-curve; raises if off-curve."""
    left = check_states(system, left, interior=True).reshape(system.m)
    right = check_states(system, right, interior=True).reshape(system.m)
    s0 = float(np.linalg.norm(right - left))
    if system.name == "burgers":
        S, sig, _, _ = _burgers_point(left, s0, 1)
    else:
        curve = shock_curve(system, left, 1, s0, 101)
        S, sig = curve.states[-1], curve.sigma[-1]
    if np.max(np.abs(S - right)) > tol * max(1.0, np.max(np.abs(right))) or abs(sig - sigma) > tol * max(1.0, abs(sigma)):
        raise InvalidStateError("the right state is not on the 1-shock curve of the left state")
    return s0
