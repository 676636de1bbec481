"""Three-body phase-space states in R^4 and their basic mechanics.

States live in body coordinates (positions and velocities of the three
bodies, center of mass and total momentum pinned at zero) with G = 1
throughout.  Jacobi coordinates (q, Q, p, P) separate the (1,2) binary from
the third body and diagonalize the kinetic energy with the reduced masses
mu and nu.  Angular momentum is the bivector q^p + Q^P; the energy is
T + V with the Newtonian pair potential.

Besides the conversions this module provides the three energy-decreasing
maps used when chasing the infimum along unbounded sequences: the momentum
rescaling that preserves angular momentum, removal of the radial part of the
outer momentum, and circularization of the binary at fixed binary angular
momentum.
"""

from __future__ import annotations

import json
import os
import tempfile
import warnings
from dataclasses import dataclass

import numpy as np

from .bivectors import Bivector4, as_vec4, wedge

__all__ = [
    "CollisionError",
    "Masses",
    "State",
    "JacobiState",
    "to_jacobi",
    "from_jacobi",
    "angular_momentum",
    "kinetic_energy",
    "potential_energy",
    "energy",
    "jacobi_kinetic_energy",
    "jacobi_energy",
    "pairwise_distances",
    "scale_map",
    "drop_radial_momentum",
    "circularize_binary",
    "state_to_dict",
    "state_from_dict",
    "save_state",
    "load_state",
]

# a pair distance below this fraction of the configuration scale is a collision
COLLISION_TOL = 1e-13

_COM_TOL = 1e-12


class CollisionError(ValueError):
    """Two bodies coincide (or nearly so); the potential is singular."""


@dataclass(frozen=True)
class Masses:
    """The three positive masses, with the derived Jacobi coefficients."""

    m1: float
    m2: float
    m3: float

    def __post_init__(self):
        for name in ("m1", "m2", "m3"):
            m = getattr(self, name)
            if not (np.isfinite(m) and m > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {m}")

    @property
    def total(self) -> float:
        return self.m1 + self.m2 + self.m3

    @property
    def mu(self) -> float:
        """Reduced mass of the (1,2) binary, m1 m2 / (m1 + m2)."""
        return self.m1 * self.m2 / (self.m1 + self.m2)

    @property
    def nu(self) -> float:
        """Reduced mass of the binary-vs-third split, m3 (m1 + m2) / M."""
        return self.m3 * (self.m1 + self.m2) / self.total

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.m2, self.m3])

    def of_pair(self, pair: tuple[int, int]) -> tuple[float, float]:
        i, j = check_pair(pair)
        m = self.as_array()
        return float(m[i - 1]), float(m[j - 1])

    def permuted(self, order: tuple[int, int, int]) -> "Masses":
        m = self.as_array()
        return Masses(*(float(m[k - 1]) for k in order))


def check_pair(pair) -> tuple[int, int]:
    """Validate a 1-based body pair (i, j) with i < j."""
    i, j = int(pair[0]), int(pair[1])
    if not (1 <= i < j <= 3):
        raise ValueError(f"pair must satisfy 1 <= i < j <= 3, got ({i}, {j})")
    return i, j


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class State:
    """Positions and velocities of the three bodies, center of mass at rest.

    Both arrays have shape (3, 4).  Construction rejects states whose mass-
    weighted position or velocity sum is off zero beyond round-off scale, and
    coincident positions.
    """

    masses: Masses
    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        vel = np.asarray(self.velocities, dtype=float)
        if pos.shape != (3, 4) or vel.shape != (3, 4):
            raise ValueError("positions and velocities must have shape (3, 4)")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("positions and velocities must be finite")
        m = self.masses.as_array()
        pos_scale = max(np.abs(pos).max(), 1e-300)
        vel_scale = np.abs(vel).max()
        com = m @ pos
        mom = m @ vel
        if np.abs(com).max() > _COM_TOL * self.masses.total * pos_scale:
            raise ValueError("center of mass is not at the origin")
        if vel_scale > 0 and np.abs(mom).max() > _COM_TOL * self.masses.total * vel_scale:
            raise ValueError("total momentum is not zero")
        d = pairwise_distance_array(pos)
        if d.min() <= COLLISION_TOL * d.max():
            raise CollisionError("two bodies coincide")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "velocities", _frozen(vel))

    @classmethod
    def recentred(cls, masses: Masses, positions, velocities) -> "State":
        """Build a state after projecting out center-of-mass offsets."""
        pos = np.asarray(positions, dtype=float)
        vel = np.asarray(velocities, dtype=float)
        m = masses.as_array()
        pos = pos - (m @ pos) / masses.total
        vel = vel - (m @ vel) / masses.total
        return cls(masses, pos, vel)


@dataclass(frozen=True)
class JacobiState:
    """Jacobi coordinates: relative vectors (q, Q) and conjugate momenta (p, P)."""

    masses: Masses
    q: np.ndarray
    Q: np.ndarray
    p: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        for name in ("q", "Q", "p", "P"):
            object.__setattr__(self, name, _frozen(as_vec4(getattr(self, name))))


def pairwise_distance_array(pos: np.ndarray) -> np.ndarray:
    """(d12, d13, d23) from a (3, 4) position array."""
    return np.array(
        [
            np.linalg.norm(pos[0] - pos[1]),
            np.linalg.norm(pos[0] - pos[2]),
            np.linalg.norm(pos[1] - pos[2]),
        ]
    )


def pairwise_distances(s: State) -> np.ndarray:
    return pairwise_distance_array(s.positions)


def to_jacobi(s: State) -> JacobiState:
    """Jacobi coordinates of a state: q = q2 - q1, Q = q3 - binary barycenter."""
    ms = s.masses
    m12 = ms.m1 + ms.m2
    pos, vel = s.positions, s.velocities
    q = pos[1] - pos[0]
    Q = pos[2] - (ms.m1 * pos[0] + ms.m2 * pos[1]) / m12
    p = ms.mu * (vel[1] - vel[0])
    P = ms.nu * (vel[2] - (ms.m1 * vel[0] + ms.m2 * vel[1]) / m12)
    return JacobiState(ms, q, Q, p, P)


def from_jacobi(j: JacobiState) -> State:
    """Body coordinates of a Jacobi state, center of mass and momentum at zero."""
    ms = j.masses
    m12 = ms.m1 + ms.m2
    f3 = ms.m3 / ms.total
    s1 = ms.m1 / m12
    s2 = ms.m2 / m12

    q1 = -f3 * j.Q - s2 * j.q
    q2 = -f3 * j.Q + s1 * j.q
    q3 = (m12 / ms.total) * j.Q

    qdot = j.p / ms.mu
    Qdot = j.P / ms.nu
    v1 = -f3 * Qdot - s2 * qdot
    v2 = -f3 * Qdot + s1 * qdot
    v3 = (m12 / ms.total) * Qdot
    return State(ms, np.stack([q1, q2, q3]), np.stack([v1, v2, v3]))


def angular_momentum(s: State | JacobiState) -> Bivector4:
    """Total angular momentum bivector q^p + Q^P."""
    j = s if isinstance(s, JacobiState) else to_jacobi(s)
    return wedge(j.q, j.p) + wedge(j.Q, j.P)


def angular_momentum_body(s: State) -> Bivector4:
    """Angular momentum summed directly over bodies, sum_i m_i q_i ^ v_i."""
    m = s.masses.as_array()
    total = Bivector4.zero()
    for mi, qi, vi in zip(m, s.positions, s.velocities):
        total = total + mi * wedge(qi, vi)
    return total


def kinetic_energy(s: State) -> float:
    m = s.masses.as_array()
    return float(0.5 * np.sum(m[:, None] * s.velocities**2))


def _potential(ms: Masses, d: np.ndarray) -> float:
    if d.min() <= COLLISION_TOL * d.max():
        raise CollisionError("potential is singular at a collision")
    return float(-(ms.m1 * ms.m2 / d[0] + ms.m1 * ms.m3 / d[1] + ms.m2 * ms.m3 / d[2]))


def potential_energy(s: State) -> float:
    return _potential(s.masses, pairwise_distances(s))


def energy(s: State) -> float:
    """Total energy H = T + V; raises CollisionError at a collision."""
    return kinetic_energy(s) + potential_energy(s)


def jacobi_distances(j: JacobiState) -> np.ndarray:
    """(d12, d13, d23) straight from Jacobi configuration vectors."""
    ms = j.masses
    m12 = ms.m1 + ms.m2
    u13 = j.Q + (ms.m2 / m12) * j.q
    u23 = j.Q - (ms.m1 / m12) * j.q
    return np.array(
        [np.linalg.norm(j.q), np.linalg.norm(u13), np.linalg.norm(u23)]
    )


def jacobi_kinetic_energy(j: JacobiState) -> float:
    ms = j.masses
    return float(np.dot(j.p, j.p) / (2 * ms.mu) + np.dot(j.P, j.P) / (2 * ms.nu))


def jacobi_energy(j: JacobiState) -> float:
    return jacobi_kinetic_energy(j) + _potential(j.masses, jacobi_distances(j))


def scale_map(j: JacobiState, lam: float) -> JacobiState:
    """(q, Q, p, P) -> (lam q, lam Q, p/lam, P/lam); preserves q^p and Q^P.

    Sends kinetic energy T to T / lam^2 and potential V to V / lam, so for
    lam large the energy of any state creeps up to 0 from below.
    """
    if not lam > 0:
        raise ValueError("scale factor must be positive")
    return JacobiState(j.masses, lam * j.q, lam * j.Q, j.p / lam, j.P / lam)


def drop_radial_momentum(j: JacobiState) -> JacobiState:
    """Remove the component of P along Q; Q^P and hence L are unchanged.

    The removed component is pure radial motion of the third body, which
    contributes kinetic energy but nothing to the angular momentum, so the
    energy never increases.
    """
    qq = float(np.dot(j.Q, j.Q))
    if qq == 0.0:
        raise ValueError("outer vector Q is zero; no radial direction defined")
    P_new = j.P - (np.dot(j.P, j.Q) / qq) * j.Q
    return JacobiState(j.masses, j.q, j.Q, j.p, P_new)


def circularize_binary(j: JacobiState) -> JacobiState:
    """Replace (q, p) by the circular binary with the same bivector q^p.

    Keeps the plane, magnitude and orientation of the binary angular momentum
    while minimizing the two-body energy of the (1,2) pair, which becomes
    -(m1 m2)^3 / (2 |q^p|^2 (m1 + m2)).  Raises when q^p = 0: no circular
    orbit carries zero angular momentum.
    """
    from .kepler import circular_binary  # local import; kepler builds on phase

    ms = j.masses
    pi = wedge(j.q, j.p)
    l = pi.norm
    if l == 0.0:
        raise ValueError("binary angular momentum q^p is zero; cannot circularize")
    u = j.q / np.linalg.norm(j.q)
    w = j.p - np.dot(j.p, u) * u
    v = w / np.linalg.norm(w)
    q_new, p_new = circular_binary(ms.m1, ms.m2, l, (u, v))
    return JacobiState(ms, q_new, j.Q, p_new, j.P)


def binary_energy(j: JacobiState) -> float:
    """Kinetic plus pair potential of the (1,2) binary alone."""
    ms = j.masses
    d12 = np.linalg.norm(j.q)
    if d12 == 0.0:
        raise CollisionError("binary collision")
    return float(np.dot(j.p, j.p) / (2 * ms.mu) - ms.m1 * ms.m2 / d12)


# ---------------------------------------------------------------------------
# JSON state files


def state_to_dict(s: State) -> dict:
    return {
        "masses": [s.masses.m1, s.masses.m2, s.masses.m3],
        "positions": s.positions.tolist(),
        "velocities": s.velocities.tolist(),
    }


def state_from_dict(data: dict, recenter: bool = False) -> State:
    """Read the state schema; optionally recenter (with a warning) instead of failing."""
    try:
        masses = Masses(*(float(m) for m in data["masses"]))
        pos = np.asarray(data["positions"], dtype=float)
        vel = np.asarray(data["velocities"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state object: {exc}") from exc
    if pos.shape != (3, 4) or vel.shape != (3, 4):
        raise ValueError("positions and velocities must be 3 lists of 4 reals")
    if recenter:
        m = masses.as_array()
        com = (m @ pos) / masses.total
        mom = (m @ vel) / masses.total
        pos_scale = max(np.abs(pos).max(), 1e-300)
        if np.abs(com).max() > _COM_TOL * pos_scale or np.abs(mom).max() > _COM_TOL * max(
            np.abs(vel).max(), 1e-300
        ):
            warnings.warn("state recentred: center of mass / momentum were nonzero")
        return State.recentred(masses, pos, vel)
    return State(masses, pos, vel)


def save_state(s: State, path: str) -> None:
    """Write a state JSON file atomically."""
    payload = json.dumps(state_to_dict(s), indent=2, sort_keys=True)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload + "\n")
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def load_state(path: str, recenter: bool = False) -> State:
    with open(path) as fh:
        return state_from_dict(json.load(fh), recenter=recenter)
