"""Explicit escape sequences approaching a critical energy at infinity.

For each body pair (i, j) and each choice of which rotation magnitude the
binary carries, there is a one-parameter family of states with the exact
angular momentum l1 e1^e2 + l2 e3^e4 whose energy tends to the critical value
of that cluster at infinity as the separation parameter beta grows, always
staying strictly below it: the cross attraction between the binary and the
third body decays like 1/beta while the leftover outer kinetic energy decays
like 1/beta^2.

The canonical construction places the triangle in the e1-e3 plane with the
inertia axes along e1 and e3 and all velocities in the orthogonal e2-e4
plane: the binary is the circular two-body configuration in its rotation
plane, and the outer relative velocity is the pure rotation giving the
"large binary" its prescribed angular momentum (not a circular outer orbit;
only the angular-momentum contribution is constrained).  Other pair choices
are generated from it by renumbering bodies, and the other magnitude choice
by swapping the two rotation planes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .kepler import circular_radius, energy_at_infinity
from .phase import JacobiState, Masses, State, check_pair, energy, from_jacobi

__all__ = ["EscapeParams", "SweepRecord", "SweepResult", "escape_state", "escape_sweep"]

# body orderings placing pair (i, j) first: PAIR_ORDER[(i, j)] maps the
# canonical slots (binary-1, binary-2, third) to original body labels
PAIR_ORDER = {
    (1, 2): (1, 2, 3),
    (1, 3): (1, 3, 2),
    (2, 3): (2, 3, 1),
}


@dataclass(frozen=True)
class EscapeParams:
    """Escape-family parameters; ``beta`` is the separation along the family."""

    masses: Masses
    pair: tuple[int, int]
    k_index: int
    l1: float
    l2: float
    beta: float | None = None

    def __post_init__(self):
        check_pair(self.pair)
        if self.k_index not in (1, 2):
            raise ValueError("k_index selects which magnitude the binary carries; 1 or 2")
        if not (self.l1 > 0 and self.l2 > 0):
            raise ValueError("both rotation magnitudes l1, l2 must be positive")
        if self.beta is not None and not self.beta > 0:
            raise ValueError("separation parameter beta must be positive")

    @property
    def binary_l(self) -> float:
        return self.l1 if self.k_index == 1 else self.l2

    @property
    def outer_l(self) -> float:
        return self.l2 if self.k_index == 1 else self.l1

    def limit_energy(self) -> float:
        """The critical energy this family approaches from below."""
        return energy_at_infinity(self.masses, self.pair, self.binary_l)


def escape_state(params: EscapeParams) -> State:
    """One state of the escape family at the given separation parameter.

    The returned state has angular momentum exactly
    l1 e1^e2 + l2 e3^e4 (to round-off) and, for beta large enough, energy
    strictly below ``params.limit_energy()``.
    """
    if params.beta is None:
        raise ValueError("escape_state needs beta set on the parameters")
    order = PAIR_ORDER[check_pair(params.pair)]
    pm = params.masses.permuted(order)
    mi, mj, mk = pm.m1, pm.m2, pm.m3
    total = pm.total

    lb = params.binary_l
    r = circular_radius(mi, mj, lb)
    # binary plane (e1, e2) when it carries l1, (e3, e4) when it carries l2
    if params.k_index == 1:
        b_pos, b_vel, o_pos, o_vel = 0, 1, 2, 3
    else:
        b_pos, b_vel, o_pos, o_vel = 2, 3, 0, 1

    q = np.zeros(4)
    q[b_pos] = -r
    p = np.zeros(4)
    p[b_vel] = -lb / r

    Q = np.zeros(4)
    Q[o_pos] = params.beta * total
    P = np.zeros(4)
    P[o_vel] = params.outer_l / (params.beta * total)

    permuted = from_jacobi(JacobiState(pm, q, Q, p, P))

    inverse = np.argsort(np.array(order) - 1)
    return State(
        params.masses,
        permuted.positions[inverse],
        permuted.velocities[inverse],
    )


@dataclass(frozen=True)
class SweepRecord:
    beta: float
    energy: float
    gap: float  # energy minus the limiting critical value


@dataclass(frozen=True)
class SweepResult:
    """Energies along an escape family over a ladder of separations."""

    params: EscapeParams
    records: list[SweepRecord]
    limit: float
    beta0: float | None  # least ladder beta beyond which every gap is negative
    limit_estimate: float  # extrapolated limit from the tail of the ladder
    tail_slope: float  # log-log slope of |gap| vs beta over the last decade


def _tail(betas: np.ndarray, lo_factor: float = 10.0) -> np.ndarray:
    mask = betas >= betas[-1] / lo_factor
    if mask.sum() < 3:
        mask[-3:] = True
    return mask


def escape_sweep(params: EscapeParams, betas: Sequence[float]) -> SweepResult:
    """Evaluate the family energy over an increasing ladder of separations.

    Reports the gap to the limiting critical value at each beta, the least
    ladder beta past which the gap stays negative, the log-log slope of the
    gap tail (the cross attraction makes it -1), and the limit extrapolated
    from a 1/beta + 1/beta^2 fit over the last decade of the ladder.
    """
    betas = np.asarray(list(betas), dtype=float)
    if betas.ndim != 1 or len(betas) < 2:
        raise ValueError("need at least two beta values")
    if not (np.all(betas > 0) and np.all(np.diff(betas) > 0)):
        raise ValueError("betas must be positive and increasing")

    limit = params.limit_energy()
    energies = np.array(
        [energy(escape_state(replace(params, beta=float(b)))) for b in betas]
    )
    gaps = energies - limit

    beta0 = None
    negative = gaps < 0
    for idx in range(len(betas)):
        if negative[idx:].all():
            beta0 = float(betas[idx])
            break

    tail = _tail(betas)
    bt, gt = betas[tail], gaps[tail]
    slope = float(np.polyfit(np.log(bt), np.log(np.abs(gt)), 1)[0])

    # gap(beta) = a / beta + b / beta^2 to this order; fit and extrapolate
    design = np.stack([np.ones_like(bt), 1.0 / bt, 1.0 / bt**2], axis=1)
    coef, *_ = np.linalg.lstsq(design, energies[tail], rcond=None)
    limit_estimate = float(coef[0])

    records = [
        SweepRecord(beta=float(b), energy=float(e), gap=float(g))
        for b, e, g in zip(betas, energies, gaps)
    ]
    return SweepResult(
        params=params,
        records=records,
        limit=limit,
        beta0=beta0,
        limit_estimate=limit_estimate,
        tail_slope=slope,
    )
