"""The energy minimum at fixed rank-4 angular momentum is attained.

Constrained minimization over three-body states with a prescribed angular
momentum bivector finds an actual minimizer whose energy sits strictly below
every critical value at infinity, so no escaping sequence can undercut it.
The minimizer is a relative equilibrium: integrating it keeps the triangle's
mutual distances constant.
"""

import numpy as np

from threebody4d import (
    Bivector4,
    IntegratorConfig,
    Masses,
    MinimizeConfig,
    energy_at_infinity,
    integrate,
    minimize_at_momentum,
)
from threebody4d.dynamics import characteristic_period
from threebody4d.phase import pairwise_distances

masses = Masses(1 / 2, 1 / 3, 1 / 6)
target = Bivector4(np.array([1.0, 0, 0, 0, 0, 1.0]))  # l1 = l2 = 1

print("minimizing H over states with L = e1^e2 + e3^e4 ...")
result = minimize_at_momentum(masses, target, MinimizeConfig(restarts=16, rng_seed=0))
print(f"H_min = {result.H_min:.10f}")
print(f"constraint residual |L - target| = {result.constraint_residual:.2e}")
print(f"{result.restarts_agreeing}/16 restarts reached the same value (to 1e-6 relative)")

print("\ncritical values at infinity for l = 1:")
for pair in ((1, 2), (1, 3), (2, 3)):
    v = energy_at_infinity(masses, pair, 1.0)
    print(f"  pair {pair}: {v:>12.8f}   (H_min below by {v - result.H_min:.6f})")

s = result.state
print("\nminimizer triangle (mutual distances):", np.round(pairwise_distances(s), 6))

period = characteristic_period(s)
print(f"\nintegrating 10 rotation periods (T = {period:.2f}) with the order-4 scheme ...")
cfg = IntegratorConfig(dt=period / 10_000, t_end=10 * period,
                       scheme="fourth-order-composition", record_every=200)
traj = integrate(s, cfg)
d0 = pairwise_distances(s)
drift = max(float(np.max(np.abs(pairwise_distances(st) - d0) / d0)) for st in traj.states)
print(f"max relative drift of the mutual distances: {drift:.2e}  (a relative equilibrium)")
print(f"energy drift {np.abs(traj.energy_drift).max():.2e}, "
      f"momentum drift {traj.momentum_drift.max():.2e}")
