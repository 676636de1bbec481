"""Bivector algebra in R^4: wedge products, spectral splits, nearest rank-2.

Angular momentum of a spatially four-dimensional system is a bivector, not a
vector: generically it has rank 4 and two rotation magnitudes l1 <= l2.  This
walk-through shows the canonical form, the distance to the cone of simple
(rank-2) bivectors, and the lower bound l1 <= |a^b| for any split
L = a^b + A^B.
"""

import numpy as np

from threebody4d import Bivector4, nearest_rank2, pfaffian, spectral_decompose, wedge

e = np.eye(4)

print("== canonical form ==")
L = wedge(e[0], e[1]) + 2.0 * wedge(e[2], e[3])
sf = spectral_decompose(L)
print(f"L = e1^e2 + 2 e3^e4: |L| = {L.norm:.6f}, pfaffian = {pfaffian(L):.6f}")
print(f"rotation magnitudes l1 = {sf.l1:.6f}, l2 = {sf.l2:.6f} (rank {sf.rank})")

print("\n== a generic bivector ==")
rng = np.random.default_rng(1)
B = Bivector4(rng.normal(size=6))
sf = spectral_decompose(B)
print(f"random B: l1 = {sf.l1:.6f}, l2 = {sf.l2:.6f}")
print(f"invariant check: l1^2 + l2^2 = {sf.l1**2 + sf.l2**2:.6f} vs |B|^2 = {B.norm**2:.6f}")
print(f"                 l1 * l2     = {sf.l1 * sf.l2:.6f} vs |pf| = {abs(pfaffian(B)):.6f}")

pi, dist = nearest_rank2(B)
print(f"nearest simple bivector: distance {dist:.6f} (= l1), residual rank-2 check:")
print(f"  pf(B - pi) = {pfaffian(B - pi):.2e}, |B - pi| = {(B - pi).norm:.6f}")

print("\n== the lower bound l1 <= |a^b| over random splits ==")
worst = np.inf
for _ in range(2000):
    a, b, A, Bv = rng.uniform(-1, 1, size=(4, 4))
    total = wedge(a, b) + wedge(A, Bv)
    sf = spectral_decompose(total)
    if sf.rank == 4:
        worst = min(worst, min(wedge(a, b).norm, wedge(A, Bv).norm) - sf.l1)
print(f"min over 2000 rank-4 samples of min(|a^b|, |A^B|) - l1 = {worst:.3e}  (never negative)")
