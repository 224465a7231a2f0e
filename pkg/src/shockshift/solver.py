"""First-order finite-volume solver and initial-data builders.

Numerical fluxes: exact Godunov for Burgers, HLL for isentropic Euler,
HLLC for the full Euler equations and Rusanov for user-supplied systems.
Boundaries are either far-field (ghost cells pinned at given states) or
periodic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, InvalidStateError, ParameterError
from .grid import FieldSnapshot, Grid1D
from .systems import SystemDescriptor

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(5)

DEFAULT_SCHEMES = {"burgers": "godunov", "isentropic": "hll", "euler": "hllc"}
CONSERVED_NAMES = {"burgers": ("u",), "isentropic": ("rho", "rho_u"), "euler": ("rho", "rho_u", "rho_E")}


@dataclass
class SolverConfig:
    """Time-stepping parameters.

    ``left_state``/``right_state`` are the far-field ghost values; when left
    as ``None`` the outermost cells are copied (zero gradient).
    """

    T: float
    cfl: float = 0.45
    boundary: str = "farfield"
    left_state: Optional[np.ndarray] = None
    right_state: Optional[np.ndarray] = None
    scheme: Optional[str] = None

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]")
        if self.boundary not in ("farfield", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if not self.T >= 0:
            raise ConfigError("end time must be >= 0")
        if self.scheme is not None and self.scheme not in ("godunov", "hll", "hllc", "rusanov"):
            raise ConfigError(f"unknown flux scheme {self.scheme!r}")

    def scheme_for(self, system: SystemDescriptor) -> str:
        if self.scheme is not None:
            return self.scheme
        return DEFAULT_SCHEMES.get(system.name, "rusanov")


# ---------------------------------------------------------------------------
# numerical fluxes


def _godunov_burgers(ul, ur):
    f = lambda u: u * u  # noqa: E731
    rare = np.where(ul > 0, f(ul), np.where(ur < 0, f(ur), 0.0))
    return np.where(ul > ur, np.maximum(f(ul), f(ur)), rare)


def _safe_speeds(system, U):
    """``(lambda_min, lambda_max)`` with vacuum cells mapped to ``(+inf, -inf)``."""
    vac = system.vacuum(U)
    Us = np.where(vac[..., None], 1.0, U)
    if system.name == "euler":
        # avoid touching the unused placeholder energy at vacuum
        Us = np.where(vac[..., None], np.array([1.0, 0.0, 1.0]), U)
    lo, hi = system.eigenvalues(Us)
    return np.where(vac, np.inf, lo), np.where(vac, -np.inf, hi)


def _wave_bounds(system, UL, UR):
    loL, hiL = _safe_speeds(system, UL)
    loR, hiR = _safe_speeds(system, UR)
    sl = np.minimum(loL, loR)
    sr = np.maximum(hiL, hiR)
    both_vac = ~np.isfinite(sl)
    sl = np.where(both_vac, 0.0, sl)
    sr = np.where(both_vac, 0.0, sr)
    if not (np.all(np.isfinite(sl)) and np.all(np.isfinite(sr))):
        raise InvalidStateError("non-finite wave-speed estimate")
    return sl, sr


def _hll(system, UL, UR):
    FL, FR = system.flux(UL), system.flux(UR)
    sl, sr = _wave_bounds(system, UL, UR)
    sl = np.minimum(sl, 0.0)[..., None]
    sr = np.maximum(sr, 0.0)[..., None]
    width = sr - sl
    safe = np.where(width > 0, width, 1.0)
    mid = (sr * FL - sl * FR + sl * sr * (UR - UL)) / safe
    return np.where(width > 0, mid, FL)


def _hllc(system, UL, UR):
    g = system.gamma
    FL, FR = system.flux(UL), system.flux(UR)
    sl, sr = _wave_bounds(system, UL, UR)

    def prim(U):
        rho = U[..., 0]
        vac = rho <= 0
        safe = np.where(vac, 1.0, rho)
        u = np.where(vac, 0.0, U[..., 1] / safe)
        p = np.where(vac, 0.0, (g - 1.0) * (U[..., 2] - 0.5 * rho * u * u))
        return rho, u, p

    rl, ul, pl = prim(UL)
    rr, ur, pr = prim(UR)
    den = rl * (sl - ul) - rr * (sr - ur)
    safe_den = np.where(den != 0, den, 1.0)
    s_star = np.where(den != 0, (pr - pl + rl * ul * (sl - ul) - rr * ur * (sr - ur)) / safe_den, 0.0)

    def star(U, rho, u, p, sk):
        dk = sk - s_star
        safe_dk = np.where(dk != 0, dk, 1.0)
        fac = np.where(dk != 0, rho * (sk - u) / safe_dk, 0.0)
        safe_rho = np.where(rho > 0, rho, 1.0)
        E_over = np.where(rho > 0, U[..., 2] / safe_rho, 0.0)
        safe_su = np.where(rho * (sk - u) != 0, rho * (sk - u), 1.0)
        p_term = np.where(rho * (sk - u) != 0, p / safe_su, 0.0)
        return np.stack([fac, fac * s_star, fac * (E_over + (s_star - u) * (s_star + p_term))], axis=-1)

    FsL = FL + sl[..., None] * (star(UL, rl, ul, pl, sl) - UL)
    FsR = FR + sr[..., None] * (star(UR, rr, ur, pr, sr) - UR)
    out = np.where((sl >= 0)[..., None], FL, np.where((s_star >= 0)[..., None], FsL, np.where((sr > 0)[..., None], FsR, FR)))
    return out


def _rusanov(system, UL, UR):
    sl, sr = _wave_bounds(system, UL, UR)
    smax = np.maximum(np.abs(sl), np.abs(sr))[..., None]
    return 0.5 * (system.flux(UL) + system.flux(UR)) - 0.5 * smax * (UR - UL)


def riemann_flux(system: SystemDescriptor, left, right, scheme: Optional[str] = None) -> np.ndarray:
    """Numerical flux between ``left`` and ``right`` (stacked states allowed)."""
    UL = np.asarray(left, dtype=float)
    UR = np.asarray(right, dtype=float)
    if system.m == 1 and (UL.ndim == 0 or UL.shape[-1] != 1):
        UL, UR = UL[..., None], UR[..., None]
    if not (np.all(np.isfinite(UL)) and np.all(np.isfinite(UR))):
        raise InvalidStateError("non-finite state in numerical flux")
    scheme = scheme or DEFAULT_SCHEMES.get(system.name, "rusanov")
    if scheme == "godunov":
        if system.name != "burgers":
            raise ConfigError("the exact Godunov flux is only available for Burgers")
        return _godunov_burgers(UL[..., 0], UR[..., 0])[..., None]
    if scheme == "hll":
        return _hll(system, UL, UR)
    if scheme == "hllc":
        if system.gamma is None or system.m != 3:
            raise ConfigError("HLLC needs the polytropic Euler system")
        return _hllc(system, UL, UR)
    if scheme == "rusanov":
        return _rusanov(system, UL, UR)
    raise ConfigError(f"unknown flux scheme {scheme!r}")


# ---------------------------------------------------------------------------
# time stepping


def max_speed(system: SystemDescriptor, cells: np.ndarray) -> float:
    lo, hi = _safe_speeds(system, cells)
    lo = np.where(np.isfinite(lo), lo, 0.0)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    return float(max(np.max(np.abs(lo)), np.max(np.abs(hi))))


def stable_dt(system: SystemDescriptor, field: FieldSnapshot, config: SolverConfig) -> float:
    """``cfl * dx / max |lambda|``, not overshooting the end time."""
    speed = max_speed(system, field.cells)
    dt = config.cfl * field.grid.dx / speed if speed > 0 else config.cfl * field.grid.dx
    return min(dt, max(config.T - field.time, 0.0)) if config.T > field.time else dt


def _padded(field: FieldSnapshot, config: SolverConfig) -> np.ndarray:
    cells = field.cells
    if config.boundary == "periodic":
        return np.vstack([cells[-1:], cells, cells[:1]])
    left = cells[:1] if config.left_state is None else np.asarray(config.left_state, float).reshape(1, -1)
    right = cells[-1:] if config.right_state is None else np.asarray(config.right_state, float).reshape(1, -1)
    return np.vstack([left, cells, right])


def interface_fluxes(system: SystemDescriptor, field: FieldSnapshot, config: SolverConfig) -> np.ndarray:
    """Fluxes at the ``n_cells + 1`` cell edges, boundaries included."""
    padded = _padded(field, config)
    return riemann_flux(system, padded[:-1], padded[1:], config.scheme_for(system))


def step(system: SystemDescriptor, field: FieldSnapshot, config: SolverConfig, dt: Optional[float] = None) -> FieldSnapshot:
    """One conservative forward-Euler update; ``dt`` defaults to :func:`stable_dt`."""
    if dt is None:
        dt = stable_dt(system, field, config)
    F = interface_fluxes(system, field, config)
    cells = field.cells - (dt / field.grid.dx) * (F[1:] - F[:-1])
    if not np.all(np.isfinite(cells)):
        raise InvalidStateError(f"non-finite cell values after step at t={field.time}")
    if system.admits_vacuum and np.any(cells[:, 0] < 0):
        raise InvalidStateError(f"negative density after step at t={field.time}")
    return FieldSnapshot(field.time + dt, field.grid, cells)


# ---------------------------------------------------------------------------
# initial data


def cell_averages(fn: Callable[[np.ndarray], np.ndarray], grid: Grid1D, breakpoints=()) -> np.ndarray:
    """Cell averages of ``fn`` by 5-point Gauss-Legendre on each smooth piece.

    Cells containing a breakpoint are split there, so jumps and kinks of
    ``fn`` at the breakpoints are integrated exactly up to quadrature order.
    """
    edges = grid.edges
    bps = np.sort(np.asarray([b for b in breakpoints if grid.x_min < b < grid.x_max], dtype=float))
    dx = grid.dx
    x = (grid.centers[:, None] + 0.5 * dx * GL_NODES[None, :]).ravel()
    vals = np.asarray(fn(x), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    out = 0.5 * np.einsum("q,iqk->ik", GL_WEIGHTS, vals.reshape(grid.n_cells, len(GL_NODES), -1))
    for i in np.unique(np.searchsorted(edges, bps, side="right") - 1):
        a, b = edges[i], edges[i + 1]
        inner = bps[(bps > a) & (bps < b)]
        if inner.size == 0:
            continue
        knots = np.concatenate([[a], inner, [b]])
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            xq = 0.5 * (hi + lo) + 0.5 * (hi - lo) * GL_NODES
            v = np.asarray(fn(xq), dtype=float)
            if v.ndim == 1:
                v = v[:, None]
            total = total + 0.5 * (hi - lo) * (GL_WEIGHTS[:, None] * v).sum(axis=0)
        out[i] = total / (b - a)
    return out


def _bump(x, width, center):
    xi = (x - center) / width
    return np.where(np.abs(xi) < 1, np.cos(0.5 * np.pi * xi) ** 2, 0.0)


@dataclass
class InitialProfile:
    """Pointwise initial data in conserved variables plus its breakpoints."""

    fn: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple
    tail_l2_squared: float = 0.0


def _step_states(system, left, right, offset):
    L = np.asarray(left, float).reshape(system.m)
    R = np.asarray(right, float).reshape(system.m)
    return lambda x: np.where((np.asarray(x) < offset)[:, None], L, R)


def _perturbed(system, base_fn, delta_fn, components):
    names = system.primitive_names
    idx = [names.index(c) for c in components]

    def fn(x):
        U = base_fn(x)
        W = system.to_primitive(U).copy()
        d = delta_fn(x)
        for k in idx:
            W[:, k] = W[:, k] + d
        return system.from_primitive(W)

    return fn


def initial_profile(system: SystemDescriptor, kind: str, params: dict, left=None, right=None) -> InitialProfile:
    """Pointwise profile for ``kind`` in {pure_shock, shock_plus_bump, prop14, random_perturbation}.

    Perturbations act additively on the primitive variables listed in
    ``params["components"]`` (default: all of them).
    """
    params = dict(params)
    if kind == "prop14":
        if system.name != "burgers":
            raise ConfigError("prop14 data is defined for Burgers only")
        r = float(params["r"])
        eps = float(params["eps"])
        if not 0 < r < 0.5:
            raise ParameterError("prop14 needs 0 < r < 1/2")
        if eps < 0:
            raise ParameterError("prop14 needs eps >= 0")
        amp = np.sqrt(2 * r * eps)

        def fn(x):
            x = np.asarray(x, float)
            xm = np.minimum(x, 0.0)
            return np.where(x < 0, 1.0 + amp / (1.0 - xm) ** (0.5 + r), -1.0)[:, None]

        return InitialProfile(fn, (0.0,))
    if left is None or right is None:
        raise ConfigError(f"{kind} data needs the shock states")
    offset = float(params.get("offset", 0.0))
    base = _step_states(system, left, right, offset)
    components = params.get("components", list(system.primitive_names))
    if kind == "pure_shock":
        return InitialProfile(base, (offset,))
    if kind == "shock_plus_bump":
        amp = float(params.get("amplitude", 0.0))
        width = float(params["width"])
        center = float(params["center"])
        if not width > 0:
            raise ConfigError("bump width must be positive")
        if amp == 0.0:
            return InitialProfile(base, (offset,))
        fn = _perturbed(system, base, lambda x: amp * _bump(x, width, center), components)
        return InitialProfile(fn, (offset, center - width, center, center + width))
    if kind == "random_perturbation":
        rng = np.random.default_rng(int(params.get("seed", 0)))
        amp = float(params.get("amplitude", 0.0))
        lo, hi = (float(v) for v in params["support"])
        if not hi > lo:
            raise ConfigError("perturbation support must be a nonempty interval")
        n_modes = int(params.get("modes", 8))
        coef = rng.uniform(-1.0, 1.0, n_modes) / np.arange(1, n_modes + 1)
        norm = np.sum(np.abs(coef))

        def delta(x):
            xi = (np.asarray(x) - lo) / (hi - lo)
            inside = (xi > 0) & (xi < 1)
            k = np.arange(1, n_modes + 1)
            val = np.sin(np.pi * np.outer(np.clip(xi, 0, 1), k)) @ coef / norm
            return np.where(inside, amp * val, 0.0)

        fn = _perturbed(system, base, delta, components)
        return InitialProfile(fn, (offset, lo, hi))
    raise ConfigError(f"unknown initial-data kind {kind!r}")


def initial_data(system: SystemDescriptor, kind: str, params: dict, grid: Grid1D, left=None, right=None) -> FieldSnapshot:
    """Cell averages of :func:`initial_profile` at ``t = 0``."""
    prof = initial_profile(system, kind, params, left, right)
    cells = cell_averages(prof.fn, grid, prof.breakpoints)
    if not np.all(system.extended(cells)):
        raise ConfigError("initial data leaves the domain of the system")
    return FieldSnapshot(0.0, grid, cells)


def profile_l2_distance(system: SystemDescriptor, kind: str, params: dict, grid: Grid1D, left=None, right=None, shift: float = 0.0) -> float:
    """``||U0 - S(. - shift)||_{L2}`` of the pointwise profile.

    Quadrature covers the grid; for prop14 data the part of the tail beyond
    the left end of the grid is added in closed form.
    """
    prof = initial_profile(system, kind, params, left, right)
    if kind == "prop14":
        left, right = np.array([1.0]), np.array([-1.0])
    step_fn = _step_states(system, left, right, shift)
    sq = cell_averages(lambda x: np.sum((prof.fn(x) - step_fn(x)) ** 2, axis=-1), grid, prof.breakpoints + (shift,))
    total = float(np.sum(sq) * grid.dx)
    if kind == "prop14":
        r, eps = float(params["r"]), float(params["eps"])
        total += eps * (1.0 - grid.x_min) ** (-2 * r)
    return float(np.sqrt(total))


# ---------------------------------------------------------------------------
# output


def write_snapshot(system: SystemDescriptor, field: FieldSnapshot, path) -> Path:
    """CSV with columns ``x_center`` and one per conserved component."""
    path = Path(path)
    names = CONSERVED_NAMES.get(system.name, tuple(f"q{k}" for k in range(system.m)))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("x_center",) + tuple(names))
        for x, row in zip(field.grid.centers, field.cells):
            w.writerow([repr(float(x))] + [repr(float(v)) for v in row])
    return path
