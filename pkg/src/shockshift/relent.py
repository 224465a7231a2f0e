"""Relative entropy, relative entropy flux and the weighted pseudo-norm.

For a reference state ``V`` in the interior,

    eta(U|V) = eta(U) - eta(V) - grad eta(V) . (U - V)
    F(U, V)  = G(U) - G(V) - grad eta(V) . (A(U) - A(V))

and, for a split position ``x`` and weight ``a``,

    E_a = int_{-inf}^{x} eta(U|U_L) dx + a int_{x}^{inf} eta(U|U_R) dx.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfRangeError
from .grid import FieldSnapshot
from .systems import DomainBox, SystemDescriptor, check_states


def rel_entropy(system: SystemDescriptor, U, V) -> np.ndarray:
    """``eta(U|V)`` for ``U`` in the extended domain and ``V`` in the interior."""
    U = check_states(system, U)
    V = check_states(system, V, interior=True)
    if system.relative_entropy is not None:
        return np.maximum(system.relative_entropy(U, V), 0.0)
    dU = U - V
    val = system.entropy(U) - system.entropy(V) - np.sum(system.entropy_grad(V) * dU, axis=-1)
    # round-off can push the exact zero on the diagonal slightly negative
    return np.maximum(val, 0.0)


def rel_flux(system: SystemDescriptor, U, V) -> np.ndarray:
    """``F(U, V)``; vanishes identically when ``U == V``."""
    U = check_states(system, U)
    V = check_states(system, V, interior=True)
    if system.relative_flux is not None:
        return system.relative_flux(U, V)
    dA = system.flux(U) - system.flux(V)
    val = system.entropy_flux(U) - system.entropy_flux(V) - np.sum(system.entropy_grad(V) * dA, axis=-1)
    same = np.all(U == V, axis=-1)
    return np.where(same, 0.0, val)


def comparability_constants(system: SystemDescriptor, omega, box: DomainBox, n_samples: int = 10_000, seed: int = 0):
    """Sampled ``(C1, C2)`` with ``C1 |U-V|^2 <= eta(U|V) <= C2 |U-V|^2``.

    ``U`` ranges over low-discrepancy samples of ``box`` (vacuum included
    when the box contains it) and ``V`` over the states of ``omega``. The
    result is an estimate, not a certified bound.
    """
    omega = np.atleast_2d(check_states(system, omega, interior=True)) if len(np.atleast_1d(omega)) else None
    if omega is None or omega.size == 0:
        raise ConfigError("comparability needs a nonempty reference set")
    per_ref = max(1, n_samples // len(omega))
    ratios = []
    for k, V in enumerate(omega.reshape(-1, system.m)):
        U = box.sample(system, per_ref, seed=seed + k)
        d2 = np.sum((U - V) ** 2, axis=-1)
        keep = d2 > 1e-20
        ratios.append(rel_entropy(system, U[keep], V) / d2[keep])
    ratios = np.concatenate(ratios)
    return float(ratios.min()), float(ratios.max())


@dataclass(frozen=True)
class PseudoNormConfig:
    left: np.ndarray
    right: np.ndarray
    a: float
    x: float

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError("weight a must be positive")
        if np.array_equal(np.asarray(self.left), np.asarray(self.right)):
            raise ConfigError("reference states must differ")


def _split_weights(field: FieldSnapshot, x: float):
    """Length of each cell lying left and right of ``x``."""
    grid = field.grid
    if not (grid.x_min <= x <= grid.x_max):
        raise OutOfRangeError(f"split position {x} outside the grid")
    edges = grid.edges
    left = np.clip(x - edges[:-1], 0.0, grid.dx)
    right = grid.dx - left
    return left, right


def pseudo_norm(system: SystemDescriptor, field: FieldSnapshot, config: PseudoNormConfig) -> float:
    """Midpoint-rule ``E_a`` of a snapshot; the split cell is divided exactly at ``x``."""
    lw, rw = _split_weights(field, config.x)
    eta_l = rel_entropy(system, field.cells, config.left)
    eta_r = rel_entropy(system, field.cells, config.right)
    return float(np.sum(lw * eta_l) + config.a * np.sum(rw * eta_r))


def shifted_l2_distance(field: FieldSnapshot, left, right, x: float) -> float:
    """``||U - S(. - x)||_{L2}`` with ``S`` the step from ``left`` to ``right``."""
    lw, rw = _split_weights(field, x)
    dl = np.sum((field.cells - np.asarray(left, dtype=float)) ** 2, axis=-1)
    dr = np.sum((field.cells - np.asarray(right, dtype=float)) ** 2, axis=-1)
    return float(np.sqrt(np.sum(lw * dl) + np.sum(rw * dr)))
