"""Conservation-law systems with a convex entropy.

A :class:`SystemDescriptor` bundles the flux ``A``, the entropy ``eta``, its
gradient, the entropy flux ``G`` and the extremal eigenvalues of ``grad A``.
All callables are vectorised: states are arrays whose last axis holds the
``m`` conserved components.

Three systems are built in:

* Burgers ``u_t + (u^2)_x = 0`` with ``eta = u^2/2``, ``G = 2u^3/3``;
* isentropic Euler in conserved variables ``(rho, rho u)``;
* full polytropic Euler in ``(rho, rho u, rho E)``.

The Euler maps are extended by continuity to the vacuum state, where they
vanish; gradients and eigenvalues refuse vacuum input.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.stats import qmc

from .errors import (
    ConfigError,
    InvalidStateError,
    UndefinedEigenvalueError,
    VacuumGradientError,
)

FD_STEP = 1e-5

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SystemDescriptor:
    """Immutable description of one system of conservation laws.

    Every callable takes an array of shape ``(..., m)`` that has already been
    validated; use the module-level functions (:func:`flux`,
    :func:`entropy_quantities`, ...) for checked access.
    """

    name: str
    m: int
    flux: ArrayFn
    entropy: ArrayFn
    entropy_grad: ArrayFn
    entropy_flux: ArrayFn
    eigenvalues: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]
    interior: ArrayFn
    vacuum: ArrayFn
    jacobian: Optional[ArrayFn] = None
    primitive_names: tuple[str, ...] = ()
    to_primitive: Optional[ArrayFn] = None
    from_primitive: Optional[ArrayFn] = None
    gamma: Optional[float] = None
    pressure: Optional[Callable] = None
    closed_form: bool = True
    params: dict = field(default_factory=dict)
    # optional cancellation-free forms of eta(U|V) and F(U, V)
    relative_entropy: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    relative_flux: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def extended(self, U: np.ndarray) -> np.ndarray:
        """Membership in the extended domain (interior or vacuum)."""
        return self.interior(U) | self.vacuum(U)

    @property
    def admits_vacuum(self) -> bool:
        return "rho" in self.primitive_names


def as_states(system: SystemDescriptor, U) -> np.ndarray:
    """Coerce ``U`` to a float array of shape ``(..., m)``.

    For scalar systems a bare number or a 1-D array of values is accepted;
    a 1-D array of length one is read as a single state.
    """
    arr = np.asarray(U, dtype=float)
    if system.m == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != system.m:
        raise InvalidStateError(
            f"{system.name}: expected {system.m} components, got shape {arr.shape}"
        )
    return arr


def check_states(system: SystemDescriptor, U, *, interior: bool = False) -> np.ndarray:
    arr = as_states(system, U)
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError(f"{system.name}: non-finite state components")
    if interior:
        inside = system.interior(arr)
        if not np.all(inside):
            if np.any(system.vacuum(arr)):
                raise VacuumGradientError(f"{system.name}: vacuum state where an interior state is required")
            raise InvalidStateError(f"{system.name}: state outside the interior domain")
    elif not np.all(system.extended(arr)):
        raise InvalidStateError(f"{system.name}: state outside the extended domain")
    return arr


# ---------------------------------------------------------------------------
# checked operations


def flux(system: SystemDescriptor, U) -> np.ndarray:
    """Return ``A(U)``; continuous up to vacuum for the Euler systems."""
    return system.flux(check_states(system, U))


def entropy_quantities(system: SystemDescriptor, U, *, gradient: bool = True):
    """Return ``(eta, grad eta, G)`` at ``U``.

    The gradient is only defined in the interior; asking for it at vacuum
    raises :class:`VacuumGradientError`. Pass ``gradient=False`` to get
    ``(eta, None, G)`` on the extended domain.
    """
    arr = check_states(system, U)
    grad = None
    if gradient:
        if np.any(system.vacuum(arr)):
            raise VacuumGradientError(f"{system.name}: entropy gradient requested at vacuum")
        grad = system.entropy_grad(check_states(system, arr, interior=True))
    return system.entropy(arr), grad, system.entropy_flux(arr)


def extremal_eigenvalues(system: SystemDescriptor, U):
    """Return ``(lambda_min, lambda_max)`` of ``grad A(U)``."""
    arr = as_states(system, U)
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError(f"{system.name}: non-finite state components")
    if np.any(system.vacuum(arr)):
        raise UndefinedEigenvalueError(f"{system.name}: eigenvalues undefined at vacuum")
    arr = check_states(system, arr, interior=True)
    return system.eigenvalues(arr)


def flux_jacobian(system: SystemDescriptor, U) -> np.ndarray:
    """Return ``grad A(U)`` with shape ``(..., m, m)``; entry ``[i, j] = dA_i/dU_j``."""
    arr = check_states(system, U, interior=True)
    if system.jacobian is not None:
        return system.jacobian(arr)
    return fd_jacobian(system.flux, arr)


def _central(fn: ArrayFn, U: np.ndarray, j: int, h: float) -> np.ndarray:
    # five-point central stencil: O(h^4) truncation at step h
    e = np.zeros(U.shape[-1])
    e[j] = h
    return (8.0 * (fn(U + e) - fn(U - e)) - (fn(U + 2 * e) - fn(U - 2 * e))) / (12.0 * h)


def fd_jacobian(fn: ArrayFn, U: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of a vector map; output ``[..., i, j] = d fn_i / d U_j``."""
    return np.stack([_central(fn, U, j, h) for j in range(U.shape[-1])], axis=-1)


def fd_gradient(fn: ArrayFn, U: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar map."""
    return np.stack([_central(fn, U, j, h) for j in range(U.shape[-1])], axis=-1)


def entropy_hessian(system: SystemDescriptor, U) -> np.ndarray:
    """Central-difference Hessian of the entropy, shape ``(..., m, m)``."""
    arr = check_states(system, U, interior=True)
    H = fd_jacobian(system.entropy_grad, arr)
    return 0.5 * (H + np.swapaxes(H, -1, -2))


@dataclass
class CompatibilityReport:
    residual: float
    threshold: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.residual < self.threshold


def compatibility_check(system: SystemDescriptor, samples, h: float = FD_STEP) -> CompatibilityReport:
    """Max residual of ``dG/dU_j - sum_i d_i eta dA_i/dU_j`` over the samples.

    Derivatives of ``G`` and ``A`` use central differences with step ``h``.
    The pass threshold is ``1e-7`` for closed-form systems and ``1e-5``
    for user-supplied ones.
    """
    if samples is None or len(np.atleast_1d(samples)) == 0:
        raise ConfigError("compatibility_check needs at least one sample")
    U = check_states(system, samples, interior=True).reshape(-1, system.m)
    dG = fd_gradient(system.entropy_flux, U, h)
    dA = fd_jacobian(system.flux, U, h)
    grad = system.entropy_grad(U)
    res = dG - np.einsum("ni,nij->nj", grad, dA)
    threshold = 1e-7 if system.closed_form else 1e-5
    return CompatibilityReport(float(np.max(np.abs(res))), threshold, len(U))


def reflect(system: SystemDescriptor) -> SystemDescriptor:
    """System obtained by ``x -> -x``: flux and entropy flux change sign.

    n-shocks of ``system`` are 1-shocks of the reflected system with the
    speed negated, and vice versa.
    """

    def eig(U):
        lo, hi = system.eigenvalues(U)
        return -hi, -lo

    jac = None
    if system.jacobian is not None:
        jac = lambda U: -system.jacobian(U)  # noqa: E731
    rflux = None
    if system.relative_flux is not None:
        rflux = lambda U, V: -system.relative_flux(U, V)  # noqa: E731
    return replace(
        system,
        name=system.name + "~reflected",
        flux=lambda U: -system.flux(U),
        entropy_flux=lambda U: -system.entropy_flux(U),
        eigenvalues=eig,
        jacobian=jac,
        relative_flux=rflux,
    )


# ---------------------------------------------------------------------------
# built-in systems


def burgers() -> SystemDescriptor:
    """Burgers equation ``u_t + (u^2)_x = 0`` with quadratic entropy."""
    return SystemDescriptor(
        name="burgers",
        m=1,
        flux=lambda U: U**2,
        entropy=lambda U: 0.5 * U[..., 0] ** 2,
        entropy_grad=lambda U: U.copy(),
        entropy_flux=lambda U: 2.0 * U[..., 0] ** 3 / 3.0,
        eigenvalues=lambda U: (2.0 * U[..., 0], 2.0 * U[..., 0]),
        interior=lambda U: np.isfinite(U[..., 0]),
        vacuum=lambda U: np.zeros(U.shape[:-1], dtype=bool),
        jacobian=lambda U: 2.0 * U[..., None],
        primitive_names=("u",),
        to_primitive=lambda U: U.copy(),
        from_primitive=lambda W: np.asarray(W, dtype=float).copy(),
        relative_entropy=lambda U, V: 0.5 * (U[..., 0] - V[..., 0]) ** 2,
        relative_flux=lambda U, V: (U[..., 0] - V[..., 0]) ** 2 * (2.0 * U[..., 0] + V[..., 0]) / 3.0,
    )


def _power_law(gamma: float):
    """Pressure ``rho^gamma`` and entropy primitive ``S = rho^gamma/(gamma-1)``."""

    def S(rho):
        return rho**gamma / (gamma - 1.0)

    def dS(rho):
        return gamma * rho ** (gamma - 1.0) / (gamma - 1.0)

    def P(rho):
        return rho**gamma

    def dP(rho):
        return gamma * rho ** (gamma - 1.0)

    return P, dP, S, dS


def _general_pressure(P, dP=None):
    """Entropy primitive for a user pressure law.

    ``S'' = P'(rho)/rho`` with ``S(1) = S'(1) = 0``, evaluated by adaptive
    quadrature (slow; meant for audits, not for large grids).
    """
    if dP is None:

        def dP(rho):
            h = 1e-6 * max(1.0, rho)
            lo = max(rho - h, 0.0)
            return (P(rho + h) - P(lo)) / (rho + h - lo)

    def _dS_scalar(rho):
        return integrate.quad(lambda r: dP(r) / r, 1.0, rho, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    def _S_scalar(rho):
        return integrate.quad(_dS_scalar, 1.0, rho, epsabs=1e-13, epsrel=1e-12, limit=200)[0]

    dS = np.vectorize(_dS_scalar, otypes=[float])
    S = np.vectorize(_S_scalar, otypes=[float])
    return (lambda r: np.vectorize(P, otypes=[float])(r)), np.vectorize(dP, otypes=[float]), S, dS


def isentropic(gamma: float = 2.0, pressure: Optional[Callable] = None, dpressure: Optional[Callable] = None) -> SystemDescriptor:
    """Isentropic Euler in ``(rho, m = rho u)``.

    With ``pressure=None`` the power law ``P = rho^gamma`` is used (``gamma=2``
    gives ``S = rho^2`` and ``S(rho|rho') = (rho - rho')^2``). A callable
    ``pressure`` switches to the quadrature-based entropy primitive.
    """
    if pressure is None:
        if gamma <= 1.0:
            raise ConfigError("isentropic power law needs gamma > 1")
        P, dP, S, dS = _power_law(gamma)
        closed = True
        S0 = 0.0
    else:
        P, dP, S, dS = _general_pressure(pressure, dpressure)
        closed = False
        S0 = float(S(0.0))

    def split(U):
        rho, m = U[..., 0], U[..., 1]
        vac = rho == 0.0
        safe = np.where(vac, 1.0, rho)
        u = np.where(vac, 0.0, m / safe)
        return rho, m, u, vac, safe

    def flux_fn(U):
        rho, m, u, vac, _ = split(U)
        p = np.where(vac, 0.0, P(np.where(vac, 1.0, rho)))
        return np.stack([m, m * u + p], axis=-1)

    def entropy_fn(U):
        rho, m, u, vac, safe = split(U)
        return np.where(vac, S0, 0.5 * m * u + S(safe))

    def grad_fn(U):
        rho, m, u, vac, safe = split(U)
        return np.stack([-0.5 * u**2 + dS(safe), u], axis=-1)

    def eflux_fn(U):
        rho, m, u, vac, safe = split(U)
        return np.where(vac, 0.0, 0.5 * m * u**2 + m * dS(safe))

    def eig_fn(U):
        rho, m, u, vac, safe = split(U)
        c = np.sqrt(dP(safe))
        return u - c, u + c

    def jac_fn(U):
        rho, m, u, vac, safe = split(U)
        J = np.zeros(U.shape + (2,))
        J[..., 0, 1] = 1.0
        J[..., 1, 0] = -(u**2) + dP(safe)
        J[..., 1, 1] = 2.0 * u
        return J

    def interior(U):
        return np.isfinite(U).all(axis=-1) & (U[..., 0] > 0.0)

    def vacuum(U):
        return (U[..., 0] == 0.0) & (U[..., 1] == 0.0)

    def to_prim(U):
        rho, m, u, vac, _ = split(U)
        return np.stack([rho, u], axis=-1)

    def from_prim(W):
        W = np.asarray(W, dtype=float)
        return np.stack([W[..., 0], W[..., 0] * W[..., 1]], axis=-1)

    return SystemDescriptor(
        name="isentropic",
        m=2,
        flux=flux_fn,
        entropy=entropy_fn,
        entropy_grad=grad_fn,
        entropy_flux=eflux_fn,
        eigenvalues=eig_fn,
        interior=interior,
        vacuum=vacuum,
        jacobian=jac_fn,
        primitive_names=("rho", "u"),
        to_primitive=to_prim,
        from_primitive=from_prim,
        gamma=gamma if pressure is None else None,
        pressure=P,
        closed_form=closed,
        params={"gamma": gamma} if pressure is None else {"pressure": "user"},
    )


def euler(gamma: float = 1.4) -> SystemDescriptor:
    """Full Euler equations of a polytropic gas in ``(rho, rho u, rho E)``.

    Entropy pair ``eta = (gamma-1) rho ln rho - rho ln e`` and ``G = u eta``.
    """
    if gamma <= 1.0:
        raise ConfigError("polytropic gas needs gamma > 1")
    g = float(gamma)

    def split(U):
        rho, m, En = U[..., 0], U[..., 1], U[..., 2]
        vac = rho == 0.0
        safe = np.where(vac, 1.0, rho)
        u = np.where(vac, 0.0, m / safe)
        e = np.where(vac, 1.0, En / safe - 0.5 * u**2)
        return rho, m, En, u, e, vac, safe

    def flux_fn(U):
        rho, m, En, u, e, vac, _ = split(U)
        p = (g - 1.0) * rho * e
        return np.stack([m, m * u + p, u * (En + p)], axis=-1)

    def entropy_fn(U):
        rho, m, En, u, e, vac, safe = split(U)
        return np.where(vac, 0.0, (g - 1.0) * rho * np.log(safe) - rho * np.log(e))

    def grad_fn(U):
        rho, m, En, u, e, vac, safe = split(U)
        d_rho = (g - 1.0) * (np.log(safe) + 1.0) - np.log(e) + 1.0 - 0.5 * u**2 / e
        return np.stack([d_rho, u / e, -1.0 / e], axis=-1)

    def eflux_fn(U):
        return split(U)[3] * entropy_fn(U)

    def eig_fn(U):
        rho, m, En, u, e, vac, safe = split(U)
        c = np.sqrt(g * (g - 1.0) * e)
        return u - c, u + c

    def jac_fn(U):
        rho, m, En, u, e, vac, safe = split(U)
        p = (g - 1.0) * rho * e
        H = (En + p) / safe
        J = np.zeros(U.shape + (3,))
        J[..., 0, 1] = 1.0
        J[..., 1, 0] = 0.5 * (g - 3.0) * u**2
        J[..., 1, 1] = (3.0 - g) * u
        J[..., 1, 2] = g - 1.0
        J[..., 2, 0] = u * (0.5 * (g - 1.0) * u**2 - H)
        J[..., 2, 1] = H - (g - 1.0) * u**2
        J[..., 2, 2] = g * u
        return J

    def interior(U):
        ok = np.isfinite(U).all(axis=-1) & (U[..., 0] > 0.0)
        rho = np.where(ok, U[..., 0], 1.0)
        e = U[..., 2] / rho - 0.5 * (U[..., 1] / rho) ** 2
        return ok & (e > 0.0)

    def vacuum(U):
        return (U[..., 0] == 0.0) & (U[..., 1] == 0.0) & (U[..., 2] == 0.0)

    def to_prim(U):
        rho, m, En, u, e, vac, _ = split(U)
        return np.stack([rho, u, np.where(vac, 0.0, e)], axis=-1)

    def from_prim(W):
        W = np.asarray(W, dtype=float)
        rho, u, e = W[..., 0], W[..., 1], W[..., 2]
        return np.stack([rho, rho * u, rho * (e + 0.5 * u**2)], axis=-1)

    return SystemDescriptor(
        name="euler",
        m=3,
        flux=flux_fn,
        entropy=entropy_fn,
        entropy_grad=grad_fn,
        entropy_flux=eflux_fn,
        eigenvalues=eig_fn,
        interior=interior,
        vacuum=vacuum,
        jacobian=jac_fn,
        primitive_names=("rho", "u", "e"),
        to_primitive=to_prim,
        from_primitive=from_prim,
        gamma=g,
        pressure=lambda rho, e: (g - 1.0) * rho * e,
        params={"gamma": g},
    )


def custom_system(
    name: str,
    m: int,
    flux_fn: ArrayFn,
    entropy_fn: ArrayFn,
    entropy_flux_fn: ArrayFn,
    *,
    entropy_grad_fn: Optional[ArrayFn] = None,
    interior_fn: Optional[ArrayFn] = None,
) -> SystemDescriptor:
    """User-supplied system; missing derivatives fall back to central differences.

    No admissibility guarantees are made for such systems.
    """
    grad = entropy_grad_fn or (lambda U: fd_gradient(entropy_fn, U))

    def eig(U):
        lam = np.linalg.eigvals(fd_jacobian(flux_fn, U)).real
        return lam.min(axis=-1), lam.max(axis=-1)

    return SystemDescriptor(
        name=name,
        m=m,
        flux=flux_fn,
        entropy=entropy_fn,
        entropy_grad=grad,
        entropy_flux=entropy_flux_fn,
        eigenvalues=eig,
        interior=interior_fn or (lambda U: np.isfinite(U).all(axis=-1)),
        vacuum=lambda U: np.zeros(U.shape[:-1], dtype=bool),
        closed_form=False,
        primitive_names=tuple(f"q{i}" for i in range(m)),
        to_primitive=lambda U: U.copy(),
        from_primitive=lambda W: np.asarray(W, dtype=float).copy(),
    )


def make_system(name: str, **params) -> SystemDescriptor:
    """Select a built-in system by name: ``burgers``, ``isentropic`` or ``euler``."""
    if name == "burgers":
        if params:
            raise ConfigError(f"burgers takes no parameters, got {sorted(params)}")
        return burgers()
    if name == "isentropic":
        pressure = params.pop("pressure", "power")
        if pressure not in ("power", None):
            raise ConfigError(f"unknown pressure law {pressure!r}; only 'power' ships built in")
        gamma = params.pop("gamma", 2.0)
        if params:
            raise ConfigError(f"unexpected isentropic parameters {sorted(params)}")
        return isentropic(gamma)
    if name == "euler":
        gamma = params.pop("gamma", 1.4)
        if params:
            raise ConfigError(f"unexpected euler parameters {sorted(params)}")
        return euler(gamma)
    raise ConfigError(f"unknown system {name!r}")


# ---------------------------------------------------------------------------
# bounded state sets


@dataclass(frozen=True)
class DomainBox:
    """Box of physical (primitive) variables, e.g. ``{"rho": (0, 2), "u": (-2, 2)}``.

    Primitive variables are ``u`` (Burgers), ``(rho, u)`` (isentropic) and
    ``(rho, u, e)`` (full Euler).
    """

    bounds: dict

    def validate(self, system: SystemDescriptor) -> None:
        if set(self.bounds) != set(system.primitive_names):
            raise ConfigError(
                f"box variables {sorted(self.bounds)} do not match {system.primitive_names}"
            )
        for key, (lo, hi) in self.bounds.items():
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ConfigError(f"bad bounds for {key}: {(lo, hi)}")
        if "rho" in self.bounds and self.bounds["rho"][0] < 0:
            raise ConfigError("density lower bound must be >= 0")

    def includes_vacuum(self, system: SystemDescriptor) -> bool:
        return system.admits_vacuum and self.bounds["rho"][0] == 0.0

    def sample(self, system: SystemDescriptor, n: int, seed: int = 0, *, interior_only: bool = False) -> np.ndarray:
        """Low-discrepancy (scrambled Halton) samples mapped to conserved variables.

        The vacuum point is appended when the box contains it, unless
        ``interior_only`` is set.
        """
        self.validate(system)
        names = system.primitive_names
        lo = np.array([self.bounds[k][0] for k in names], dtype=float)
        hi = np.array([self.bounds[k][1] for k in names], dtype=float)
        pts = qmc.Halton(d=len(names), scramble=True, seed=seed).random(n)
        W = lo + (hi - lo) * pts
        U = system.from_primitive(W)
        keep = system.interior(U)
        U = U[keep]
        if self.includes_vacuum(system) and not interior_only:
            U = np.vstack([U, np.zeros((1, system.m))])
        return U
