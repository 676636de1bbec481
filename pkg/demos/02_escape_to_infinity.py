"""Escape families: states drifting to infinity with energy below the critical value.

A tight circular binary plus a receding third body realizes energies
arbitrarily close to the critical value -(m_i m_j)^3 / (2 l^2 (m_i + m_j)) of
the cluster at infinity, and, once the third body is far enough, strictly
below it: the cross attraction (~ -1/beta) dominates the leftover outer
kinetic energy (~ +1/beta^2).
"""

import numpy as np

from threebody4d import EscapeParams, Masses, angular_momentum, energy, escape_state, escape_sweep

masses = Masses(1 / 2, 1 / 3, 1 / 6)
params = EscapeParams(masses, pair=(1, 2), k_index=1, l1=1.0, l2=1.0)
print(f"masses (1/2, 1/3, 1/6), binary (1,2) carrying l1 = 1")
print(f"limiting critical energy: {params.limit_energy():.10f}  (= -1/360)")

print("\none family member, beta = 100:")
s = escape_state(EscapeParams(masses, (1, 2), 1, 1.0, 1.0, beta=100.0))
print("positions:")
print(np.array_str(s.positions, precision=4, suppress_small=True))
print(f"angular momentum components: {np.round(angular_momentum(s).components, 14)}")
print(f"energy H = {energy(s):.8f} < limit {params.limit_energy():.8f}")

print("\nladder sweep, beta = 10 * 2^(0..19):")
sweep = escape_sweep(params, 10.0 * 2.0 ** np.arange(20))
print(f"{'beta':>10}  {'H':>16}  {'gap':>13}  {'gap*beta':>10}")
for rec in sweep.records[::4] + [sweep.records[-1]]:
    print(f"{rec.beta:>10.0f}  {rec.energy:>16.9e}  {rec.gap:>13.3e}  {rec.gap * rec.beta:>10.5f}")
print(f"\ngap becomes (and stays) negative from beta0 = {sweep.beta0:g}")
print("(below that the third body is still inside the binary's radius of 30)")
print(f"tail slope of |gap| vs beta: {sweep.tail_slope:.4f}  (cross attraction ~ 1/beta)")
print(f"extrapolated limit: {sweep.limit_estimate:.12f} vs exact {sweep.limit:.12f}")
