"""Step through the constant construction for the steady Burgers shock (1, -1).

Run with ``python3 demos/constants_walkthrough.py``.
"""

import numpy as np

from shockshift import ShockTriple, build_contraction_config, find_ball_constants, find_velocity_band, make_system, shift_velocity
from shockshift.constants import oa_extents

system = make_system("burgers")
shock = ShockTriple(np.array([1.0]), np.array([-1.0]), 0.0)

# %% velocity band: v must sit between F(U_L,U_R)/eta(U_L|U_R) and lambda_min(U_L)
v_lo, v_hi, v = find_velocity_band(system, shock)
print(f"band ({v_lo:.4f}, {v_hi:.4f}), midpoint v = {v:.4f}")

# %% the ball B(U_L, C0) on which both entropy inequalities hold with margin beta
C0, beta = find_ball_constants(system, shock, v)
print(f"C0 = {C0:.5f} (closed form 1/3), beta = {beta:.5f}")

# %% O_a shrinks around U_L as a decreases
for a in (0.25, 0.05, 0.01):
    up, down = oa_extents(system, shock.left, shock.right, a, np.array([[1.0], [-1.0]]))
    print(f"a = {a:<5}  O_a = ({1 - down:.4f}, {1 + up:.4f})")

# %% full construction
cfg = build_contraction_config(system, shock)
print(f"epsilon = {cfg.epsilon}, a = {cfg.a:.3e}, C_K = {cfg.C_K:.4f}")
print("halving history:")
for row in cfg.audit["halving"]:
    print(f"  a={row['a']:.3e} O_a radius={row['oa_radius']:.4f} contained={row['contained']}")

# %% the shift velocity: v on the ball, below v elsewhere, -2/3 at U_R
for u in (-1.0, 0.0, 0.5, 1.0, 1.3, 2.0):
    print(f"V({u:+.1f}) = {shift_velocity(system, u, cfg):+.6f}")
