"""Post-processing of a run: dissipation, contraction and drift-bound verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import ContractionConfig
from .drift import TracePair
from .errors import ConfigError
from .relent import rel_entropy, rel_flux
from .systems import SystemDescriptor

SERIES_COLUMNS = ("t", "Ea", "l2_dist", "x", "xdot", "vmin", "vmax", "Dt")


@dataclass
class RunSeries:
    """Per-step records of one run, all of equal length."""

    t: list = field(default_factory=list)
    Ea: list = field(default_factory=list)
    l2_dist: list = field(default_factory=list)
    x: list = field(default_factory=list)
    xdot: list = field(default_factory=list)
    vmin: list = field(default_factory=list)
    vmax: list = field(default_factory=list)
    Dt: list = field(default_factory=list)

    def append(self, **row) -> None:
        if set(row) != set(SERIES_COLUMNS):
            raise ConfigError(f"series row needs exactly {SERIES_COLUMNS}")
        for k in SERIES_COLUMNS:
            getattr(self, k).append(float(row[k]))

    def __len__(self) -> int:
        return len(self.t)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)

    def rows(self):
        return zip(*(getattr(self, k) for k in SERIES_COLUMNS))


def dissipation_check(system: SystemDescriptor, config: ContractionConfig, traces: TracePair, xdot: float) -> float:
    """``D_t = xdot [eta(U-|U_L) - a eta(U+|U_R)] - F(U-, U_L) + a F(U+, U_R)``."""
    UL, UR, a = config.shock.left, config.shock.right, config.a
    Um, Up = traces.left_trace, traces.right_trace
    val = (
        xdot * (rel_entropy(system, Um, UL) - a * rel_entropy(system, Up, UR))
        - rel_flux(system, Um, UL)
        + a * rel_flux(system, Up, UR)
    )
    return float(np.asarray(val).reshape(-1)[0])


@dataclass
class Verdict:
    passed: bool
    value: float
    tolerance: float
    flags: dict = field(default_factory=dict)


def contraction_verdict(Ea, dx: float, T: float, C_tol: float = 5.0) -> Verdict:
    """Largest rise of ``E_a`` above its running minimum against ``C_tol dx (1 + T)``."""
    Ea = np.asarray(Ea, dtype=float)
    if Ea.size == 0:
        raise ConfigError("empty E_a series")
    rise = Ea - np.minimum.accumulate(Ea)
    worst = float(rise.max())
    tol = C_tol * dx * (1.0 + T)
    return Verdict(worst <= tol, worst, tol)


@dataclass
class DriftBound:
    p: float
    constant: float
    passed: bool
    vacuous: bool
    n_points: int


def drift_bound_check(t, displacement, dx: float, U0_distance: float = 1.0, t_min: float = 1.0, p_max: float = 0.55) -> DriftBound:
    """Least-squares slope of ``log|x - sigma t|`` against ``log t`` on ``t >= t_min``.

    Points with ``|x - sigma t| < 10 dx`` are below the grid resolution and
    are skipped; if nothing is left the check passes vacuously.
    ``constant`` is ``exp(intercept) / U0_distance``.
    """
    t = np.asarray(t, dtype=float)
    d = np.abs(np.asarray(displacement, dtype=float))
    keep = (t >= t_min) & (d >= 10 * dx)
    if np.count_nonzero(keep) < 2:
        return DriftBound(float("nan"), float("nan"), True, True, int(np.count_nonzero(keep)))
    slope, intercept = np.polyfit(np.log(t[keep]), np.log(d[keep]), 1)
    const = float(np.exp(intercept) / U0_distance) if U0_distance > 0 else float("inf")
    return DriftBound(float(slope), const, bool(slope <= p_max), False, int(np.count_nonzero(keep)))


def l2_stability_constant(C1: float, C2: float, a: float) -> float:
    """``sqrt(C2 max(1, a) / (C1 min(1, a)))``."""
    return float(np.sqrt(C2 * max(1.0, a) / (C1 * min(1.0, a))))


def l2_stability_check(l2_series, U0_distance: float, C1: float, C2: float, a: float, tolerance: float = 0.05) -> Verdict:
    """``max_t ||U(t, . + x(t)) - S|| <= K ||U0 - S|| (1 + tolerance)`` with ``K`` from :func:`l2_stability_constant`."""
    l2 = np.asarray(l2_series, dtype=float)
    K = l2_stability_constant(C1, C2, a)
    bound = K * U0_distance * (1.0 + tolerance)
    worst = float(l2.max()) if l2.size else 0.0
    ratio = worst / (K * U0_distance) if U0_distance > 0 else (0.0 if worst == 0 else float("inf"))
    return Verdict(worst <= bound, ratio, bound, {"K": K})


def dissipation_summary(Dt, tol: float) -> Verdict:
    """Count steps with ``D_t > tol``; passes when they are under 0.1% of steps."""
    Dt = np.asarray(Dt, dtype=float)
    bad = int(np.sum(Dt > tol))
    frac = bad / max(Dt.size, 1)
    return Verdict(frac < 1e-3, float(Dt.max()) if Dt.size else 0.0, tol, {"violations": bad, "fraction": frac})


def sandwich_summary(xdot, vmin, vmax, tol: float = 1e-8) -> Verdict:
    """Count steps with ``xdot`` outside ``[vmin - tol, vmax + tol]``; passes under 0.1%."""
    xd, lo, hi = (np.asarray(a, dtype=float) for a in (xdot, vmin, vmax))
    bad = int(np.sum((xd < lo - tol) | (xd > hi + tol)))
    frac = bad / max(xd.size, 1)
    return Verdict(frac < 1e-3, frac, tol, {"violations": bad})
