"""Sampled construction of the contraction constants and the shift velocity.

Given an admissible 1-shock ``(U_L, U_R, sigma)`` the pipeline is

1. :func:`find_velocity_band` picks ``v`` strictly between the shock speed
   and ``lambda_min(U_L)``;
2. :func:`find_ball_constants` finds a radius ``C0`` and margin ``beta`` such
   that, on ``B(U_L, C0)``,

       -F(U, U_L) + v eta(U|U_L) <= -beta eta(U|U_L)
        F(U, U_R) - v eta(U|U_R) <= -beta eta(U|U_R)
        v < lambda_min(U);

3. :func:`find_a_star` picks ``epsilon`` and the weight ``a``.

Every constant is an estimate obtained on low-discrepancy samples; the audit
dictionaries record what was sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .errors import (
    ConfigError,
    ConfigIntegrityError,
    ContinuationError,
    HypothesisViolation,
    NotAOneShockError,
)
from .hugoniot import ShockTriple, kappa_delta, locate_on_curve, shock_curve
from .relent import rel_entropy, rel_flux
from .systems import DomainBox, SystemDescriptor, check_states

EPS_CAP = 0.45
A_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# sampling helpers


def unit_ball_points(m: int, n: int, seed: int = 0) -> np.ndarray:
    """Quasi-random points of the closed unit ball in ``R^m``.

    Interior points come from a scrambled Halton sequence; the boundary is
    covered by ``+-e_i`` and by normalised Halton directions, since the
    constraints of interest are usually tightest there.
    """
    if m == 1:
        inner = 2.0 * qmc.Halton(d=1, scramble=True, seed=seed).random(n) - 1.0
        return np.vstack([inner, [[1.0], [-1.0]]])
    cube = 2.0 * qmc.Halton(d=m, scramble=True, seed=seed).random(2 * n) - 1.0
    r = np.linalg.norm(cube, axis=1)
    inner = cube[r <= 1.0][:n]
    dirs = sphere_points(m, max(n // 4, 2 * m), seed + 1)
    return np.vstack([inner, dirs])


def sphere_points(m: int, n: int, seed: int = 0) -> np.ndarray:
    """Unit directions: the ``2m`` axis directions plus quasi-random ones."""
    axes = np.vstack([np.eye(m), -np.eye(m)])
    if m == 1:
        return axes
    n = 1 << int(np.ceil(np.log2(max(n, 2))))
    gauss = qmc.MultivariateNormalQMC(mean=np.zeros(m), seed=seed).random(n)
    gauss = gauss[np.linalg.norm(gauss, axis=1) > 1e-8]
    return np.vstack([axes, gauss / np.linalg.norm(gauss, axis=1, keepdims=True)])


def _ball(system, center, radius, pts):
    U = center + radius * pts
    return U[system.interior(U)]


# ---------------------------------------------------------------------------
# velocity band and ball constants


def find_velocity_band(system: SystemDescriptor, shock: ShockTriple):
    """Return ``(v_lo, v_hi, v)`` with ``v`` the midpoint of the admissible band."""
    UL = check_states(system, shock.left, interior=True).reshape(system.m)
    UR = check_states(system, shock.right, interior=True).reshape(system.m)
    lam_lo, _ = system.eigenvalues(UL)
    lam_lo = float(lam_lo)
    if not shock.sigma < lam_lo:
        raise NotAOneShockError(f"sigma={shock.sigma} is not below lambda_min(U_L)={lam_lo}")
    shock.validate(system)
    ratio = float(rel_flux(system, UL, UR) / rel_entropy(system, UL, UR))
    v_lo = max(float(shock.sigma), ratio)
    v_hi = lam_lo
    if not v_lo < v_hi:
        raise HypothesisViolation(f"empty velocity band ({v_lo}, {v_hi})")
    return v_lo, v_hi, 0.5 * (v_lo + v_hi)


def ball_margins(system: SystemDescriptor, shock: ShockTriple, v: float, U: np.ndarray):
    """Relative margins of the two entropy inequalities and the speed margin.

    Returns ``(m1, m2, m3)``. ``m1`` and ``m2`` are divided by the relevant
    relative entropy (``nan`` where it vanishes); ``m3 = lambda_min(U) - v``.
    """
    UL, UR = shock.left, shock.right
    hL = rel_entropy(system, U, UL)
    hR = rel_entropy(system, U, UR)
    g1 = rel_flux(system, U, UL) - v * hL
    g2 = -rel_flux(system, U, UR) + v * hR
    with np.errstate(divide="ignore", invalid="ignore"):
        m1 = np.where(hL > 1e-14, g1 / np.where(hL > 1e-14, hL, 1.0), np.nan)
        m2 = np.where(hR > 1e-14, g2 / np.where(hR > 1e-14, hR, 1.0), np.nan)
    lam_lo, _ = system.eigenvalues(U)
    return m1, m2, lam_lo - v


def _ball_ok(system, shock, v, U):
    m1, m2, m3 = ball_margins(system, shock, v, U)
    return bool(np.all(np.nan_to_num(m1, nan=1.0) > 0) and np.all(np.nan_to_num(m2, nan=1.0) > 0) and np.all(m3 > 0))


def find_ball_constants(system: SystemDescriptor, shock: ShockTriple, v: float, n_samples: int = 10_000, seed: int = 0):
    """Largest sampled radius ``C0`` (to 1%) and margin ``beta`` of the ball conditions.

    The search starts at ``|U_R - U_L|``, halves until the conditions hold
    at every sample, then bisects. ``beta`` is half the smallest relative
    margin observed at the final radius.
    """
    UL = np.asarray(shock.left, dtype=float).reshape(system.m)
    pts = unit_ball_points(system.m, n_samples, seed)
    r_hi = float(np.linalg.norm(np.asarray(shock.right, float) - UL))
    if _ball_ok(system, shock, v, _ball(system, UL, r_hi, pts)):
        r_lo = r_hi
    else:
        r_lo = r_hi
        while True:
            r_lo *= 0.5
            if r_lo < 1e-12 * max(1.0, r_hi):
                raise HypothesisViolation("no positive radius satisfies the ball conditions")
            if _ball_ok(system, shock, v, _ball(system, UL, r_lo, pts)):
                break
            r_hi = r_lo
        while (r_hi - r_lo) > 0.01 * r_lo:
            mid = 0.5 * (r_lo + r_hi)
            if _ball_ok(system, shock, v, _ball(system, UL, mid, pts)):
                r_lo = mid
            else:
                r_hi = mid
    m1, m2, _ = ball_margins(system, shock, v, _ball(system, UL, r_lo, pts))
    worst = float(min(np.nanmin(m1), np.nanmin(m2)))
    return r_lo, 0.5 * worst


# ---------------------------------------------------------------------------
# the set O_a


def oa_membership(system: SystemDescriptor, U, U_L, U_R, a: float):
    """``eta(U|U_L) - a eta(U|U_R) <= 0`` (elementwise for stacked states)."""
    return rel_entropy(system, U, U_L) - a * rel_entropy(system, U, U_R) <= 0.0


def _member_masked(system, U, U_L, U_R, a):
    ok = system.extended(U) & np.all(np.isfinite(U), axis=-1)
    out = np.zeros(U.shape[:-1], dtype=bool)
    if np.any(ok):
        out[ok] = oa_membership(system, U[ok], U_L, U_R, a)
    return out


def oa_extents(system: SystemDescriptor, U_L, U_R, a: float, directions: np.ndarray, iters: int = 60) -> np.ndarray:
    """Distance from ``U_L`` to the boundary of ``O_a`` along each direction.

    ``O_a`` is convex, so bisection along rays is exact up to ``iters``
    halvings. Rays that leave the extended domain stop there.
    """
    U_L = np.asarray(U_L, dtype=float).reshape(-1)
    U_R = np.asarray(U_R, dtype=float).reshape(-1)
    d = np.asarray(directions, dtype=float)
    scale = float(np.linalg.norm(U_R - U_L))
    hi = np.full(len(d), scale)
    cap = 1e4 * scale
    inside = _member_masked(system, U_L + hi[:, None] * d, U_L, U_R, a)
    while np.any(inside & (hi < cap)):
        hi = np.where(inside, 2 * hi, hi)
        inside = _member_masked(system, U_L + hi[:, None] * d, U_L, U_R, a)
    lo = np.zeros(len(d))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = _member_masked(system, U_L + mid[:, None] * d, U_L, U_R, a)
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return lo


def oa_radius(system: SystemDescriptor, U_L, U_R, a: float, n_directions: int = 256, seed: int = 0) -> float:
    """``max |U - U_L|`` over ``O_a``, sampled along quasi-random rays."""
    return float(np.max(oa_extents(system, U_L, U_R, a, sphere_points(system.m, n_directions, seed))))


# ---------------------------------------------------------------------------
# epsilon and a


def lemme_identity_sides(system, U, s, s0, S_s, sig_s, S_s0, UL, UR, sigma):
    """Both sides of the perturbed dissipation identity for a base ``U``.

    With ``U_R = S_{U_L}(s0)``:

        F(S(s), S(s0)) - sig(s) eta(S(s)|S(s0)) - (F(S(s), U_R) - sig(s) eta(S(s)|U_R))
      = F(U_R, S(s0)) - sig(s) eta(U_R|S(s0))
        + [grad eta(U_R) - grad eta(S(s0))] . [A(U) - A(U_L) - sig(s)(U - U_L) + (sigma - sig(s))(U_L - U_R)]
    """
    lhs = (
        rel_flux(system, S_s, S_s0)
        - sig_s * rel_entropy(system, S_s, S_s0)
        - (rel_flux(system, S_s, UR) - sig_s * rel_entropy(system, S_s, UR))
    )
    dgrad = system.entropy_grad(UR) - system.entropy_grad(S_s0)
    bracket = system.flux(U) - system.flux(UL) - sig_s[..., None] * (U - UL) + (sigma - sig_s)[..., None] * (UL - UR)
    rhs = rel_flux(system, UR, S_s0) - sig_s * rel_entropy(system, UR, S_s0) + np.sum(dgrad * bracket, axis=-1)
    return lhs, rhs


@dataclass
class _Bank:
    bases: np.ndarray
    s: list
    states: list
    sigma: list
    truncated: int = 0


def _curve_bank(system, centre, radius, n_bases, n_s, s_max, seed):
    pts = unit_ball_points(system.m, n_bases, seed)
    bases = np.vstack([centre[None, :], _ball(system, centre, radius, pts)])
    bank = _Bank(bases, [], [], [])
    for U in bases:
        try:
            c = shock_curve(system, U, 1, s_max, n_s)
            s, st, sg = c.s, c.states, c.sigma
        except ContinuationError as exc:
            good = exc.last_good_s or 0.0
            if good <= 0:
                raise
            bank.truncated += 1
            c = shock_curve(system, U, 1, good, n_s)
            s, st, sg = c.s, c.states, c.sigma
        bank.s.append(s)
        bank.states.append(st)
        bank.sigma.append(sg)
    return bank


def estimate_lemma_constant(system, shock: ShockTriple, s0: float, bank: _Bank):
    """Sampled ``C`` in the control of the perturbed identity, plus the identity gap.

    ``C = max |rhs| / (|U-U_L|^2 (1 + |dsig|) + |U-U_L| |dsig|)`` over the
    bank, with ``dsig = sigma_U(s) - sigma_U(s0)``.
    """
    UL = np.asarray(shock.left, float).reshape(system.m)
    UR = np.asarray(shock.right, float).reshape(system.m)
    C = 0.0
    gap = 0.0
    for U, s, st, sg in zip(bank.bases, bank.s, bank.states, bank.sigma):
        if s[-1] < s0:
            continue
        k0 = int(np.argmin(np.abs(s - s0)))
        if abs(s[k0] - s0) > 1e-12 * max(1.0, s0):
            continue
        S0, sig0 = st[k0], float(sg[k0])
        lhs, rhs = lemme_identity_sides(system, U[None, :], s, s0, st, sg, S0, UL, UR, float(shock.sigma))
        gap = max(gap, float(np.max(np.abs(lhs - rhs))))
        dist = float(np.linalg.norm(U - UL))
        if dist < 1e-14:
            continue
        dsig = np.abs(sg - sig0)
        denom = dist ** 2 * (1 + dsig) + dist * dsig
        C = max(C, float(np.max(np.abs(rhs) / denom)))
    return C, gap


def master_inequality(system, shock: ShockTriple, a: float, U_minus, S, sig):
    """Left side of the weighted inequality for a base ``U_-`` and curve points ``(S, sig)``."""
    UL, UR = shock.left, shock.right
    return (
        -rel_flux(system, U_minus, UL)
        + sig * rel_entropy(system, U_minus, UL)
        + a * (rel_flux(system, S, UR) - sig * rel_entropy(system, S, UR))
    )


def find_a_star(
    system: SystemDescriptor,
    shock: ShockTriple,
    v: float,
    C0: float,
    beta: float,
    *,
    n_bases: int = 64,
    n_s: int = 64,
    seed: int = 0,
    a_init: float = 0.5,
    n_directions: int = 256,
):
    """Choose ``epsilon`` and the weight ``a``.

    ``epsilon`` solves ``C (x + x^2) = kappa`` for ``x = epsilon C0`` (capped
    below one half), with ``C`` and ``kappa`` sampled. Then ``a`` is halved
    from ``a_init`` until ``O_a`` fits in ``B(U_L, epsilon C0)`` and the
    weighted inequality holds on a bank of 1-curves from bases in that ball
    (only at points with ``sigma <= v``). Returns ``(epsilon, a, audit)``
    where ``a`` is half the first passing value.
    """
    UL = np.asarray(shock.left, float).reshape(system.m)
    UR = np.asarray(shock.right, float).reshape(system.m)
    s0 = locate_on_curve(system, UL, UR, shock.sigma)
    s_max = 2.0 * s0

    main = shock_curve(system, UL, 1, s_max, 4 * n_s + 1)
    kappa, delta = kappa_delta(system, main, s0)
    if not kappa > 0:
        raise HypothesisViolation(f"sampled dissipation constant kappa={kappa} is not positive")

    # an odd node count on [0, 2 s0] puts s0 on the middle node
    n_s = 2 * (n_s // 2) + 1
    bank_c = _curve_bank(system, UL, 0.5 * C0, n_bases // 2, n_s, s_max, seed + 11)
    C, gap = estimate_lemma_constant(system, shock, s0, bank_c)
    if C > 0:
        x = 0.5 * (-1.0 + np.sqrt(1.0 + 4.0 * kappa / C))
        epsilon = min(x / C0, EPS_CAP)
    else:
        epsilon = EPS_CAP
    radius = epsilon * C0

    bank = _curve_bank(system, UL, radius, n_bases, n_s, s_max, seed + 23)
    dirs = sphere_points(system.m, n_directions, seed + 5)
    a = a_init
    history = []
    while True:
        if a < A_FLOOR:
            raise HypothesisViolation("weight a underflowed without satisfying the construction")
        r_oa = float(np.max(oa_extents(system, UL, UR, a, dirs)))
        contained = r_oa <= radius
        worst = -np.inf
        if contained:
            for U, st, sg in zip(bank.bases, bank.states, bank.sigma):
                keep = sg <= v
                if np.any(keep):
                    vals = master_inequality(system, shock, a, U, st[keep], sg[keep])
                    worst = max(worst, float(np.max(vals)))
        passed = contained and worst <= 1e-12
        history.append({"a": a, "oa_radius": r_oa, "contained": contained, "worst_master": worst})
        if passed:
            break
        a *= 0.5
    audit = {
        "s0": s0,
        "kappa": kappa,
        "delta": delta,
        "C_lemma": C,
        "identity_gap": gap,
        "bank_bases": int(len(bank.bases)),
        "bank_s_points": int(n_s),
        "bank_truncated": int(bank.truncated),
        "halving": history,
        "oa_radius": history[-1]["oa_radius"],
    }
    return epsilon, 0.5 * a, audit


# ---------------------------------------------------------------------------
# the configuration and the velocity field


@dataclass
class ContractionConfig:
    shock: ShockTriple
    v: float
    v_band: tuple
    C0: float
    beta: float
    epsilon: float
    a: float
    C_K: float = float("nan")
    audit: dict = field(default_factory=dict)

    @property
    def a_star(self) -> float:
        return 2.0 * self.a

    def to_dict(self) -> dict:
        return {
            "sigma": float(self.shock.sigma),
            "U_L": [float(x) for x in np.ravel(self.shock.left)],
            "U_R": [float(x) for x in np.ravel(self.shock.right)],
            "v_band": [float(self.v_band[0]), float(self.v_band[1])],
            "v": float(self.v),
            "C0": float(self.C0),
            "beta": float(self.beta),
            "epsilon": float(self.epsilon),
            "a": float(self.a),
            "a_star": float(self.a_star),
            "C_K": float(self.C_K),
            "audit": _jsonable(self.audit),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def default_box(system: SystemDescriptor, shock: ShockTriple, margin: float = 0.5) -> DomainBox:
    """Box of primitive variables around the shock states, widened by ``margin``."""
    W = system.to_primitive(np.vstack([np.ravel(shock.left), np.ravel(shock.right)]))
    bounds = {}
    for k, name in enumerate(system.primitive_names):
        lo, hi = float(W[:, k].min()), float(W[:, k].max())
        pad = margin * max(hi - lo, 0.5 * max(abs(lo), abs(hi)), 0.1)
        if name in ("rho", "e"):
            bounds[name] = (0.5 * lo, hi + pad)
        else:
            bounds[name] = (lo - pad, hi + pad)
    return DomainBox(bounds)


def shift_velocity(system: SystemDescriptor, U, config: ContractionConfig):
    """The shift velocity ``V(U)``; exactly ``v`` on ``B(U_L, C0)``.

    Scalar input gives a float, stacked states an array.
    """
    U = check_states(system, U)
    UL = np.asarray(config.shock.left, float).reshape(system.m)
    UR = np.asarray(config.shock.right, float).reshape(system.m)
    v, a = config.v, config.a
    hL = rel_entropy(system, U, UL)
    hR = rel_entropy(system, U, UR)
    num = np.maximum(-rel_flux(system, U, UL) + v * hL, 0.0) + a * np.maximum(rel_flux(system, U, UR) - v * hR, 0.0)
    den = hL - a * hR
    near = np.linalg.norm(U - UL, axis=-1) <= config.C0
    num = np.where(near, 0.0, num)
    bad = (num > 0) & (den <= 0)
    if np.any(bad):
        raise ConfigIntegrityError("shift velocity denominator vanishes where the numerator does not")
    with np.errstate(divide="ignore", invalid="ignore"):
        V = np.where(num > 0, v - num / np.where(den > 0, den, 1.0), v)
    return float(V) if np.ndim(V) == 0 else V


def velocity_bound(system: SystemDescriptor, config: ContractionConfig, box: DomainBox, n_samples: int = 10_000, seed: int = 0) -> float:
    """Sampled ``max |V|`` over a box of states (the Lipschitz bound of the drift)."""
    U = box.sample(system, n_samples, seed)
    # the box vertices carry the extremes of |V| in practice
    names = system.primitive_names
    corners = np.array(np.meshgrid(*[box.bounds[k] for k in names], indexing="ij")).reshape(len(names), -1).T
    corners = system.from_primitive(corners)
    corners = corners[system.interior(corners)]
    U = np.vstack([U, corners, np.ravel(config.shock.left), np.ravel(config.shock.right)])
    return float(np.max(np.abs(shift_velocity(system, U, config))))


def build_contraction_config(
    system: SystemDescriptor,
    shock: ShockTriple,
    *,
    n_samples: int = 10_000,
    seed: int = 0,
    v: Optional[float] = None,
    a: Optional[float] = None,
    box: Optional[DomainBox] = None,
    n_bases: int = 64,
    n_s: int = 64,
) -> ContractionConfig:
    """Run the whole construction; ``v`` and ``a`` may be overridden."""
    shock.validate(system)
    v_lo, v_hi, v_mid = find_velocity_band(system, shock)
    if v is None:
        v = v_mid
    elif not v_lo < v < v_hi:
        raise ConfigError(f"override v={v} outside the band ({v_lo}, {v_hi})")
    C0, beta = find_ball_constants(system, shock, v, n_samples, seed)
    audit = {"seed": seed, "n_samples": n_samples}
    if a is None:
        epsilon, a, sub = find_a_star(system, shock, v, C0, beta, n_bases=n_bases, n_s=n_s, seed=seed)
        audit.update(sub)
    else:
        if not a > 0:
            raise ConfigError("override a must be positive")
        epsilon = float("nan")
        audit["a_override"] = True
        audit["oa_radius"] = oa_radius(system, shock.left, shock.right, a, seed=seed)
    cfg = ContractionConfig(shock, float(v), (v_lo, v_hi), C0, beta, epsilon, float(a), audit=audit)
    cfg.C_K = velocity_bound(system, cfg, box or default_box(system, shock), n_samples, seed)
    return cfg


def audit_config(system: SystemDescriptor, config: ContractionConfig, n_samples: int = 10_000, seed: int = 1) -> dict:
    """Re-check the invariants of ``config`` on fresh samples (different seed)."""
    UL = np.asarray(config.shock.left, float).reshape(system.m)
    UR = np.asarray(config.shock.right, float).reshape(system.m)
    sigma = float(config.shock.sigma)
    lam_lo = float(system.eigenvalues(UL)[0])
    pts = unit_ball_points(system.m, n_samples, seed)
    ball = _ball(system, UL, config.C0, pts)
    m1, m2, m3 = ball_margins(system, config.shock, config.v, ball)
    # the stored beta is half the worst margin at the build seed; allow slack for new samples
    worst = float(min(np.nanmin(m1), np.nanmin(m2)))
    r_oa = oa_radius(system, UL, UR, config.a, seed=seed)
    radius = config.epsilon * config.C0 if np.isfinite(config.epsilon) else config.C0
    return {
        "band": sigma < config.v < lam_lo,
        "a_below_one": config.a < 1.0,
        "oa_contained": r_oa <= radius,
        "oa_radius": r_oa,
        "ball_margin": worst >= config.beta and float(np.min(m3)) > 0,
        "worst_margin": worst,
        "speed_margin": float(np.min(m3)),
    }
