"""The shift ``x(t)``: trace extraction, window-averaged velocity and Heun updates.

The velocity used at time ``t`` is the average of ``V(U(t, .))`` over the
window ``[x, x + h]`` to the right of the current position, the discrete
counterpart of a one-sided mollification. Near a shock the window sees
``V = v > sigma`` on the left and ``V < sigma`` on the right, which traps
``x`` at the discontinuity.

:func:`characteristics_drift_burgers` is an independent oracle: for the
explicit Burgers data built by ``initial_data("prop14")`` it integrates the
shock position through the characteristics that hit it from the left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import ContractionConfig, shift_velocity
from .errors import IntegrationError, OutOfRangeError, ParameterError
from .grid import FieldSnapshot
from .systems import SystemDescriptor

DEFAULT_SKIP = 2
WINDOW_CELLS = 4


@dataclass(frozen=True)
class TracePair:
    left_trace: np.ndarray
    right_trace: np.ndarray
    stencil_skip: int


def interface_traces(field: FieldSnapshot, x: float, stencil_skip: int = DEFAULT_SKIP) -> TracePair:
    """One-sided traces at ``x`` read ``stencil_skip + 1`` cells away from the cell holding ``x``."""
    if stencil_skip < 0:
        raise OutOfRangeError("stencil_skip must be >= 0")
    j = field.grid.locate(x)
    jl = j - (stencil_skip + 1)
    jr = j + (stencil_skip + 1)
    if jl < 0 or jr >= field.grid.n_cells:
        raise OutOfRangeError(f"x={x} is too close to the boundary for stencil_skip={stencil_skip}")
    return TracePair(field.cells[jl].copy(), field.cells[jr].copy(), int(stencil_skip))


def _window(field: FieldSnapshot, x: float, h: float):
    grid = field.grid
    if not (grid.x_min <= x and x + h <= grid.x_max) or not h > 0:
        raise OutOfRangeError(f"window [{x}, {x + h}] outside the grid")
    edges = grid.edges
    j0 = grid.locate(x)
    j1 = min(grid.locate(min(x + h, grid.x_max)), grid.n_cells - 1)
    idx = np.arange(j0, j1 + 1)
    lo = np.maximum(edges[idx], x)
    hi = np.minimum(edges[idx + 1], x + h)
    w = np.clip(hi - lo, 0.0, None)
    keep = w > 0
    return idx[keep], w[keep] / np.sum(w[keep])


def filippov_velocity(system: SystemDescriptor, config: ContractionConfig, field: FieldSnapshot, x: float, window_h: Optional[float] = None):
    """Window average of ``V`` on ``[x, x + window_h]``.

    Returns ``(value, V_cells, cell_indices)``; ``value`` is a convex
    combination of ``V_cells``.
    """
    h = WINDOW_CELLS * field.grid.dx if window_h is None else float(window_h)
    idx, w = _window(field, x, h)
    V = np.atleast_1d(shift_velocity(system, field.cells[idx], config))
    # offset by the minimum so equal cell values come back exactly
    lo, hi = float(V.min()), float(V.max())
    value = min(max(lo + float(np.dot(w, V - lo)), lo), hi)
    return value, V, idx


@dataclass
class DriftStep:
    x_new: float
    xdot: float
    vmin: float
    vmax: float
    traces: TracePair


def advance_drift(
    system: SystemDescriptor,
    config: ContractionConfig,
    field: FieldSnapshot,
    x: float,
    dt: float,
    field_next: Optional[FieldSnapshot] = None,
    window_h: Optional[float] = None,
    stencil_skip: int = DEFAULT_SKIP,
) -> DriftStep:
    """Heun update of ``x`` over one solver step.

    The predictor uses ``field`` at ``x``, the corrector ``field_next`` (or
    ``field``) at the predicted position. ``vmin``/``vmax`` bound ``V`` over
    every cell touched by either stage together with the left-trace cell.
    """
    traces = interface_traces(field, x, stencil_skip)
    k1, V1, _ = filippov_velocity(system, config, field, x, window_h)
    x_pred = x + dt * k1
    k2, V2, _ = filippov_velocity(system, config, field_next if field_next is not None else field, x_pred, window_h)
    xdot = 0.5 * (k1 + k2)
    V_left = np.atleast_1d(shift_velocity(system, traces.left_trace, config))
    allV = np.concatenate([V1, V2, V_left])
    return DriftStep(x + dt * xdot, xdot, float(allV.min()), float(allV.max()), traces)


@dataclass
class DriftTrajectory:
    times: list = field(default_factory=list)
    x: list = field(default_factory=list)
    xdot: list = field(default_factory=list)
    vmin: list = field(default_factory=list)
    vmax: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    dissipation: list = field(default_factory=list)

    def sandwich_violations(self, tol: float = 1e-8) -> int:
        xd, lo, hi = (np.asarray(a, float) for a in (self.xdot, self.vmin, self.vmax))
        return int(np.sum((xd < lo - tol) | (xd > hi + tol)))


# ---------------------------------------------------------------------------
# exact characteristics for the explicit Burgers example


@dataclass
class CharacteristicsResult:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xdot: np.ndarray
    checks: dict


def prop14_lower_bound(t, r: float, eps: float, corrected: bool = False):
    """Closed-form lower bound on ``x(t)`` for the explicit Burgers data.

    ``corrected=False`` gives ``sqrt(2 r eps) (1+4t)^(1/2-r) / (2 (1-2r))``;
    ``corrected=True`` subtracts the value of the primitive at ``t = 0``,
    which is what integrating the velocity bound from ``0`` to ``t`` yields.
    """
    t = np.asarray(t, dtype=float)
    c = math.sqrt(2 * r * eps) / (2 * (1 - 2 * r))
    g = (1 + 4 * t) ** (0.5 - r)
    return c * (g - 1.0) if corrected else c * g


def characteristics_drift_burgers(r: float, eps: float, T: float, n_steps: int = 20_000) -> CharacteristicsResult:
    """RK4 integration of the shock position for the explicit Burgers data.

    Solves ``x' = u0(-y) - 1`` and ``y' = (u0(-y) + 1) / (1 + 2 t u0'(-y))``
    from ``x(0) = y(0) = 0`` on a uniform grid. ``checks`` reports whether
    ``y <= 4t``, the velocity bound and the position bound (for ``t >= 1``)
    hold on the grid; the chain is reported rather than asserted.
    """
    if not 0 < r < 0.5:
        raise ParameterError("need 0 < r < 1/2")
    if eps < 0:
        raise ParameterError("need eps >= 0")
    if n_steps < 1 or not T > 0:
        raise ParameterError("need T > 0 and n_steps >= 1")
    A = math.sqrt(2 * r * eps)
    p = 0.5 + r

    def rhs(t, y):
        u = 1.0 + A * (1.0 + y) ** (-p)
        du = A * p * (1.0 + y) ** (-p - 1.0)
        den = 1.0 + 2.0 * t * du
        if den <= 0:
            raise IntegrationError(f"characteristic denominator {den} <= 0 at t={t}")
        return u - 1.0, (u + 1.0) / den

    h = T / n_steps
    t = np.linspace(0.0, T, n_steps + 1)
    xs = np.empty(n_steps + 1)
    ys = np.empty(n_steps + 1)
    x = y = 0.0
    xs[0] = ys[0] = 0.0
    for k in range(n_steps):
        tk = t[k]
        a1, b1 = rhs(tk, y)
        a2, b2 = rhs(tk + 0.5 * h, y + 0.5 * h * b1)
        a3, b3 = rhs(tk + 0.5 * h, y + 0.5 * h * b2)
        a4, b4 = rhs(tk + h, y + h * b3)
        x += h * (a1 + 2 * a2 + 2 * a3 + a4) / 6.0
        y += h * (b1 + 2 * b2 + 2 * b3 + b4) / 6.0
        xs[k + 1] = x
        ys[k + 1] = y
    xdot = A * (1.0 + ys) ** (-p)
    late = t >= 1.0
    checks = {
        "y_le_4t": bool(np.all(ys <= 4 * t + 1e-12)),
        "velocity_bound": bool(np.all(xdot >= A * (1 + 4 * t) ** (-p) - 1e-15)),
        "position_bound": bool(np.all(xs[late] >= prop14_lower_bound(t[late], r, eps))),
        "position_bound_corrected": bool(np.all(xs >= prop14_lower_bound(t, r, eps, corrected=True) - 1e-15)),
        "vacuous": eps == 0.0,
    }
    return CharacteristicsResult(t, xs, ys, xdot, checks)
