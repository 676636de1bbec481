"""Circular two-body configurations and the critical energies at infinity.

A binary (m_i, m_j) on a circular orbit with angular momentum magnitude l has
separation r = l^2 / (mu_ij m_i m_j) and two-body energy

    E(l) = -(m_i m_j)^3 / (2 l^2 (m_i + m_j)) = C_ij / l^2,

where C_ij = -(m_i m_j)^3 / (2 (m_i + m_j)) is a constant of the pair.  These
are the limiting energies of cluster-at-infinity configurations: a tight
circular (i, j) binary with the third body infinitely far away.

In scaling-invariant coordinates h = H (l1 + l2)^2 and k = l1 l2 / (l1 + l2)^2
the six limiting energies trace three curves, parametrized by
chi = l1 / (l1 + l2) in (0, 1) as (h, k) = (C_ij chi^-2, chi (1 - chi));
the two values of chi with the same k correspond to the binary carrying the
smaller or the larger rotation magnitude.  For small k the closed form on the
chi -> 0 branch expands as (C_ij / k^2)(1 - 2k - k^2 + O(k^3)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phase import Masses, check_pair

__all__ = [
    "CurvePoint",
    "circular_energy_constant",
    "energy_at_infinity",
    "circular_radius",
    "circular_binary",
    "curve_point",
    "momentum_ratio",
    "chi_small_branch",
    "critical_curve_energy",
    "SERIES_GAP_COEFF",
]

# empirical bound: |closed - series| <= SERIES_GAP_COEFF * |C_ij| * k on
# k <= 0.05 (the true gap is 2 |C_ij| k (1 + O(k)); see the series tests)
SERIES_GAP_COEFF = 3.0


@dataclass(frozen=True)
class CurvePoint:
    """One sample of a scaled energy-momentum curve of a pair at infinity."""

    pair: tuple[int, int]
    chi: float
    k: float
    h: float


def circular_energy_constant(masses: Masses, pair: tuple[int, int]) -> float:
    """Pair constant -(m_i m_j)^3 / (2 (m_i + m_j)), the circular energy at l = 1."""
    mi, mj = masses.of_pair(pair)
    return -((mi * mj) ** 3) / (2.0 * (mi + mj))


def energy_at_infinity(masses: Masses, pair: tuple[int, int], l: float) -> float:
    """Critical energy of the (i, j) cluster at infinity for binary momentum l."""
    if not l > 0:
        raise ValueError("binary angular momentum l must be positive")
    return circular_energy_constant(masses, pair) / (l * l)


def circular_radius(mi: float, mj: float, l: float) -> float:
    """Separation of the circular two-body orbit, l^2 / (mu_ij m_i m_j)."""
    mu = mi * mj / (mi + mj)
    return l * l / (mu * mi * mj)


def circular_binary(
    mi: float, mj: float, l: float, plane: tuple[np.ndarray, np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Circular two-body configuration (q, p) with q^p = l * u^v.

    ``plane`` is an ordered pair (u, v) of orthonormal vectors; q lies along u
    with the circular separation and p along v with magnitude l / |q|, so the
    two-body energy equals energy_at_infinity(mi, mj, l) and the virial
    identity |p|^2 / mu = m_i m_j / |q| holds.
    """
    if not l > 0:
        raise ValueError("binary angular momentum l must be positive")
    u = np.asarray(plane[0], dtype=float)
    v = np.asarray(plane[1], dtype=float)
    if not (
        np.isclose(u @ u, 1.0, atol=1e-12)
        and np.isclose(v @ v, 1.0, atol=1e-12)
        and np.isclose(u @ v, 0.0, atol=1e-12)
    ):
        raise ValueError("plane vectors must be orthonormal")
    r = circular_radius(mi, mj, l)
    return r * u, (l / r) * v


def momentum_ratio(l1: float, l2: float) -> float:
    """Dimensionless momentum k = l1 l2 / (l1 + l2)^2, at most 1/4."""
    return l1 * l2 / (l1 + l2) ** 2


def curve_point(masses: Masses, pair: tuple[int, int], chi: float) -> CurvePoint:
    """Scaled energy-momentum sample (h, k) = (C_ij chi^-2, chi (1 - chi))."""
    check_pair(pair)
    if not 0.0 < chi < 1.0:
        raise ValueError(f"chi must lie in (0, 1), got {chi}")
    c = circular_energy_constant(masses, pair)
    return CurvePoint(pair=tuple(pair), chi=chi, k=chi * (1.0 - chi), h=c / chi**2)


def chi_small_branch(k: float) -> float:
    """The root of chi (1 - chi) = k that vanishes with k.

    Evaluated as 2k / (1 + sqrt(1 - 4k)) to avoid the cancellation in
    (1 - sqrt(1 - 4k)) / 2 at small k; the other root is 1 - chi.
    """
    if not 0.0 < k <= 0.25:
        raise ValueError(f"k must lie in (0, 1/4], got {k}")
    return 2.0 * k / (1.0 + np.sqrt(1.0 - 4.0 * k))


def critical_curve_energy(
    masses: Masses, pair: tuple[int, int], k: float
) -> tuple[float, float]:
    """Scaled critical energy at momentum k on the small-chi branch.

    Returns (closed, series): the closed form C_ij / chi^2 with
    chi = chi_small_branch(k), and its small-k truncation
    (C_ij / k^2)(1 - 2k - k^2).  For k <= 0.05 the two differ by at most
    SERIES_GAP_COEFF * |C_ij| * k.
    """
    c = circular_energy_constant(masses, pair)
    chi = chi_small_branch(k)
    closed = c / (chi * chi)
    series = (c / (k * k)) * (1.0 - 2.0 * k - k * k)
    return closed, series
