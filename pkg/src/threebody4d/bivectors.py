"""Euclidean algebra of vectors and bivectors in R^4.

Vectors are plain numpy arrays of shape (4,). A bivector is stored by its six
coefficients on the basis planes e_i ^ e_j (i < j), in the fixed order
(12, 13, 14, 23, 24, 34), and can equivalently be viewed as the 4x4
antisymmetric matrix M with M[i, j] = c_ij for i < j.

The inner product on bivectors is <pi, rho> = (1/2) tr(Pi^T Rho), i.e. the
plain dot product of the six coefficients, so |e1^e2| = 1 and the length of a
simple bivector a^b satisfies |a^b|^2 = |a|^2 |b|^2 - <a, b>^2.

Every bivector in R^4 splits as l1 e1^e2 + l2 e3^e4 for an orthonormal frame
(e1, e2, e3, e4) and 0 <= l1 <= l2; spectral_decompose computes that canonical
form, and nearest_rank2 the closest simple (rank-2) bivector, which sits at
distance l1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BASIS_PLANES",
    "Bivector4",
    "SpectralForm",
    "as_vec4",
    "wedge",
    "inner",
    "pfaffian",
    "spectral_values",
    "spectral_decompose",
    "nearest_rank2",
]

# index pairs (i, j), i < j, matching the coefficient order (12,13,14,23,24,34)
BASIS_PLANES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

# relative scale below which the two rotation magnitudes are considered equal
# (degenerate) and below which a magnitude counts as zero for the rank
RANK_TOL = 1e-10

# internal branch switch for frame construction near the isoclinic case;
# tighter than RANK_TOL so that reconstruction stays at the 1e-12 level
_FRAME_SPLIT_TOL = 1e-13


def as_vec4(x) -> np.ndarray:
    """Coerce to a float vector of shape (4,), checking finiteness."""
    v = np.asarray(x, dtype=float)
    if v.shape != (4,):
        raise ValueError(f"expected a 4-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return v


@dataclass(frozen=True)
class Bivector4:
    """Bivector in R^4 by its six coefficients c12, c13, c14, c23, c24, c34."""

    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float)
        if c.shape != (6,):
            raise ValueError(f"expected 6 components, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("bivector components must be finite")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    @classmethod
    def zero(cls) -> "Bivector4":
        return cls(np.zeros(6))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Bivector4":
        """Build from a 4x4 antisymmetric matrix (upper triangle is read)."""
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("expected a 4x4 matrix")
        if not np.allclose(m, -m.T, atol=1e-12 * (1.0 + np.abs(m).max())):
            raise ValueError("matrix is not antisymmetric")
        return cls(np.array([m[i, j] for i, j in BASIS_PLANES]))

    def as_matrix(self) -> np.ndarray:
        """The 4x4 antisymmetric matrix representation."""
        m = np.zeros((4, 4))
        for c, (i, j) in zip(self.components, BASIS_PLANES):
            m[i, j] = c
            m[j, i] = -c
        return m

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    def __add__(self, other: "Bivector4") -> "Bivector4":
        return Bivector4(self.components + other.components)

    def __sub__(self, other: "Bivector4") -> "Bivector4":
        return Bivector4(self.components - other.components)

    def __neg__(self) -> "Bivector4":
        return Bivector4(-self.components)

    def __mul__(self, s: float) -> "Bivector4":
        return Bivector4(self.components * float(s))

    __rmul__ = __mul__

    def allclose(self, other: "Bivector4", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.components, other.components, rtol=0.0, atol=atol))


@dataclass(frozen=True)
class SpectralForm:
    """Canonical form l1 e1^e2 + l2 e3^e4 with 0 <= l1 <= l2.

    ``frame[k]`` is the k-th orthonormal basis vector e_{k+1}.  ``degenerate``
    is set when l1 and l2 agree within the scale-aware tolerance, in which
    case the split into the two planes is not unique.
    """

    l1: float
    l2: float
    frame: np.ndarray
    degenerate: bool = field(default=False)

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=float).copy()
        f.setflags(write=False)
        object.__setattr__(self, "frame", f)

    @property
    def rank(self) -> int:
        tol = RANK_TOL * (1.0 + np.hypot(self.l1, self.l2))
        return 2 * int(self.l1 > tol) + 2 * int(self.l2 > tol)

    def reconstruct(self) -> Bivector4:
        e1, e2, e3, e4 = self.frame
        return self.l1 * wedge(e1, e2) + self.l2 * wedge(e3, e4)


def wedge(a, b) -> Bivector4:
    """Wedge product a ^ b; parallel vectors give the zero bivector."""
    a = as_vec4(a)
    b = as_vec4(b)
    c = np.array([a[i] * b[j] - a[j] * b[i] for i, j in BASIS_PLANES])
    return Bivector4(c)


def inner(p1: Bivector4, p2: Bivector4) -> float:
    """Bivector inner product, (1/2) tr(P1^T P2) = sum of coefficient products."""
    return float(np.dot(p1.components, p2.components))


def pfaffian(b: Bivector4) -> float:
    """Pfaffian c12 c34 - c13 c24 + c14 c23; |pfaffian| = l1 l2."""
    c12, c13, c14, c23, c24, c34 = b.components
    return float(c12 * c34 - c13 * c24 + c14 * c23)


def spectral_values(b: Bivector4) -> tuple[float, float]:
    """Rotation magnitudes (l1, l2), l1 <= l2, from the two invariants.

    l1^2 and l2^2 are the roots of y^2 - |b|^2 y + pf(b)^2 = 0.  They are
    evaluated through the self-dual / anti-self-dual split: the quantities
    |b|^2 + 2 pf and |b|^2 - 2 pf are exact sums of three squares in the
    coefficients, so l2 = (sqrt(S) + sqrt(T)) / 2 and l1 = 2|pf| / (sqrt(S)
    + sqrt(T)) keep full relative accuracy in the difference l2 - l1 even
    near the isoclinic case, where the naive quadratic formula cancels.
    """
    c12, c13, c14, c23, c24, c34 = b.components
    s = (c12 + c34) ** 2 + (c13 - c24) ** 2 + (c14 + c23) ** 2  # |b|^2 + 2 pf
    t = (c12 - c34) ** 2 + (c13 + c24) ** 2 + (c14 - c23) ** 2  # |b|^2 - 2 pf
    half_sum = 0.5 * (np.sqrt(s) + np.sqrt(t))
    if half_sum == 0.0:
        return 0.0, 0.0
    return float(abs(pfaffian(b)) / half_sum), float(half_sum)


def _oriented_pair(u: np.ndarray, v: np.ndarray, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # flip v so the plane coefficient u^T M v comes out nonnegative
    if u @ m @ v < 0.0:
        return u, -v
    return u, v


def _complete_plane(u: np.ndarray, m: np.ndarray, l: float) -> np.ndarray:
    # second in-plane vector of the invariant plane through u; M u = -l * partner
    w = -(m @ u) / l
    w = w - (w @ u) * u
    return w / np.linalg.norm(w)


def spectral_decompose(b: Bivector4) -> SpectralForm:
    """Canonical form of a bivector: magnitudes, orthonormal frame, degeneracy flag.

    The magnitudes come from the invariants (norm and Pfaffian); the invariant
    planes from the eigenvectors of the symmetric PSD matrix -M^2, whose
    eigenvalues are l1^2 and l2^2 with multiplicity two each.  In-plane bases
    are oriented so each plane contributes +l_i.  In the isoclinic case
    l1 = l2 every plane spanned by (u, Mu) is invariant and one such split is
    returned with ``degenerate`` set.
    """
    l1, l2 = spectral_values(b)
    scale = 1.0 + l2
    degenerate = (l2 - l1) <= RANK_TOL * scale

    if l2 <= RANK_TOL * scale:  # zero bivector
        return SpectralForm(0.0, 0.0, np.eye(4), degenerate=True)

    m = b.as_matrix()

    if (l2 - l1) <= _FRAME_SPLIT_TOL * scale:
        # isoclinic: span(u, Mu) is invariant for any u
        e1 = np.array([1.0, 0.0, 0.0, 0.0])
        e2 = _complete_plane(e1, m, l2)
        # orthonormal completion of the complementary (also invariant) plane
        e3 = None
        for cand in np.eye(4):
            w = cand - (cand @ e1) * e1 - (cand @ e2) * e2
            n = np.linalg.norm(w)
            if n > 0.5:  # at least one basis vector projects this large
                e3 = w / n
                break
        e4 = _complete_plane(e3, m, l2)
        e4 = e4 - (e4 @ e1) * e1 - (e4 @ e2) * e2
        e4 /= np.linalg.norm(e4)
        frame = np.stack([e1, e2, e3, e4])
        return SpectralForm(l1, l2, frame, degenerate=True)

    s = -m @ m
    _, vecs = np.linalg.eigh(s)  # ascending: columns 0,1 span the l1 plane

    tol_zero = RANK_TOL * scale
    if l1 > tol_zero:
        e1 = vecs[:, 0]
        e2 = _complete_plane(e1, m, l1)
    else:
        e1, e2 = _oriented_pair(vecs[:, 0], vecs[:, 1], m)
    e3 = vecs[:, 3]
    e4 = _complete_plane(e3, m, l2)

    # one re-orthogonalization pass; corrections are at round-off level
    e2 = e2 - (e2 @ e1) * e1
    e2 /= np.linalg.norm(e2)
    for prev in (e1, e2):
        e3 = e3 - (e3 @ prev) * prev
    e3 /= np.linalg.norm(e3)
    for prev in (e1, e2, e3):
        e4 = e4 - (e4 @ prev) * prev
    e4 /= np.linalg.norm(e4)

    frame = np.stack([e1, e2, e3, e4])
    return SpectralForm(l1, l2, frame, degenerate=degenerate)


def nearest_rank2(b: Bivector4) -> tuple[Bivector4, float]:
    """Closest rank-2 (simple) bivector and its distance.

    Returns (pi, l1) with pi = l2 e3^e4 from the canonical form; the residual
    b - pi is itself rank 2 with norm l1.  In the degenerate case l1 = l2 the
    minimizer is non-unique and one valid choice is returned.  Raises on the
    zero bivector, which has no rank-2 neighbour in the cone.
    """
    sf = spectral_decompose(b)
    if sf.l2 <= RANK_TOL:
        raise ValueError("nearest_rank2 is undefined for the zero bivector")
    e3, e4 = sf.frame[2], sf.frame[3]
    pi = sf.l2 * wedge(e3, e4)
    return pi, sf.l1
