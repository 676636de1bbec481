"""Energy minimization at prescribed rank-4 angular momentum.

The minimum of H over three-body states with a fixed rank-4 angular momentum
bivector exists and lies strictly below every critical energy at infinity;
this module finds it numerically.  States are parametrized by the sixteen
Jacobi coordinates (q, Q, p, P) with the six bivector components of
q^p + Q^P - L as equality constraints, solved by an augmented Lagrangian
(quadratic penalty plus multiplier updates, L-BFGS-B inner iterations) from
multiple seeds, followed by a stationarity polish on the first-order
optimality system.

Seeds combine structured guesses (a tight circular binary for each pair and
magnitude choice, with the third body on a circular outer orbit; one state of
the escape family at moderate separation) with random configurations whose
momenta are least-squares matched to the target bivector — so at least one
seed starts in the basin of the global minimum.

``sweep_momentum_ratio`` traces the minimal branch of the scaled
energy-momentum diagram by running the minimizer over a grid of momentum
ratios k with l1 + l2 = 1, warm-starting each point from the previous one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .bivectors import Bivector4, spectral_values
from .escape import EscapeParams, escape_state
from .kepler import chi_small_branch, circular_binary, circular_radius
from .phase import JacobiState, Masses, State, from_jacobi, to_jacobi

__all__ = [
    "MinimizeConfig",
    "MinResult",
    "SweepPoint",
    "energy_and_gradient",
    "momentum_residual_and_jacobian",
    "minimize_at_momentum",
    "sweep_momentum_ratio",
]

_RANK_TOL = 1e-10

# distances below this fraction of the configuration scale push the inner
# solver back with a large objective value instead of evaluating 1/d
_GUARD_FRACTION = 1e-9


@dataclass(frozen=True)
class MinimizeConfig:
    restarts: int = 16
    max_outer: int = 30
    inner_maxiter: int = 600
    inner_tol: float = 1e-11
    constraint_tol: float = 1e-10
    penalty0: float = 100.0
    penalty_factor: float = 10.0
    rng_seed: int = 0
    polish: bool = True


@dataclass(frozen=True)
class MinResult:
    """Best minimizer over all restarts, with agreement diagnostics."""

    state: State
    H_min: float
    constraint_residual: float
    restarts_agreeing: int
    converged: bool
    projected_gradient: float
    restart_energies: list = field(default_factory=list)


@dataclass(frozen=True)
class SweepPoint:
    k: float
    l1: float
    l2: float
    h: float  # H_min * (l1 + l2)^2
    H_min: float
    converged: bool


# ---------------------------------------------------------------------------
# objective, constraint and their derivatives on x = (q, Q, p, P) in R^16


def _mass_constants(ms: Masses):
    m12 = ms.m1 + ms.m2
    return ms.mu, ms.nu, ms.m1 / m12, ms.m2 / m12


def _energy_grad_x(x: np.ndarray, ms: Masses) -> tuple[float, np.ndarray]:
    mu, nu, s1, s2 = _mass_constants(ms)
    q, Q, p, P = x[0:4], x[4:8], x[8:12], x[12:16]

    d12 = np.linalg.norm(q)
    u13 = Q + s2 * q
    u23 = Q - s1 * q
    d13 = np.linalg.norm(u13)
    d23 = np.linalg.norm(u23)

    T = np.dot(p, p) / (2 * mu) + np.dot(P, P) / (2 * nu)
    V = -(ms.m1 * ms.m2 / d12 + ms.m1 * ms.m3 / d13 + ms.m2 * ms.m3 / d23)

    g12 = q / d12**3
    g13 = u13 / d13**3
    g23 = u23 / d23**3

    grad = np.empty(16)
    grad[0:4] = ms.m1 * ms.m2 * g12 + s2 * ms.m1 * ms.m3 * g13 - s1 * ms.m2 * ms.m3 * g23
    grad[4:8] = ms.m1 * ms.m3 * g13 + ms.m2 * ms.m3 * g23
    grad[8:12] = p / mu
    grad[12:16] = P / nu
    return float(T + V), grad


def _wedge6(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array(
        [
            a[0] * b[1] - a[1] * b[0],
            a[0] * b[2] - a[2] * b[0],
            a[0] * b[3] - a[3] * b[0],
            a[1] * b[2] - a[2] * b[1],
            a[1] * b[3] - a[3] * b[1],
            a[2] * b[3] - a[3] * b[2],
        ]
    )


# rows of d(a^b)/da given b (and of d(a^b)/db given a, with sign flipped)
_PLANES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def _wedge_jacobians(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    Ja = np.zeros((6, 4))
    Jb = np.zeros((6, 4))
    for row, (i, j) in enumerate(_PLANES):
        Ja[row, i] = b[j]
        Ja[row, j] = -b[i]
        Jb[row, i] = -a[j]
        Jb[row, j] = a[i]
    return Ja, Jb


def _constraint_x(x: np.ndarray, target: np.ndarray) -> np.ndarray:
    q, Q, p, P = x[0:4], x[4:8], x[8:12], x[12:16]
    return _wedge6(q, p) + _wedge6(Q, P) - target


def _constraint_jac_x(x: np.ndarray) -> np.ndarray:
    q, Q, p, P = x[0:4], x[4:8], x[8:12], x[12:16]
    J = np.zeros((6, 16))
    Jq, Jp = _wedge_jacobians(q, p)
    JQ, JP = _wedge_jacobians(Q, P)
    J[:, 0:4] = Jq
    J[:, 8:12] = Jp
    J[:, 4:8] = JQ
    J[:, 12:16] = JP
    return J


def _jacobi_to_x(j: JacobiState) -> np.ndarray:
    return np.concatenate([j.q, j.Q, j.p, j.P])


def _x_to_jacobi(x: np.ndarray, ms: Masses) -> JacobiState:
    return JacobiState(ms, x[0:4], x[4:8], x[8:12], x[12:16])


def energy_and_gradient(j: JacobiState) -> tuple[float, np.ndarray]:
    """Energy and its analytic gradient with respect to (q, Q, p, P)."""
    return _energy_grad_x(_jacobi_to_x(j), j.masses)


def momentum_residual_and_jacobian(
    j: JacobiState, target: Bivector4
) -> tuple[np.ndarray, np.ndarray]:
    """Six-component residual q^p + Q^P - target and its 6x16 Jacobian."""
    x = _jacobi_to_x(j)
    return _constraint_x(x, target.components), _constraint_jac_x(x)


# ---------------------------------------------------------------------------
# augmented Lagrangian with L-BFGS-B inner solver


def _min_distance(x: np.ndarray, ms: Masses) -> float:
    _, _, s1, s2 = _mass_constants(ms)
    q, Q = x[0:4], x[4:8]
    return min(
        np.linalg.norm(q),
        np.linalg.norm(Q + s2 * q),
        np.linalg.norm(Q - s1 * q),
    )


def _augmented(x, ms, target, lam, rho):
    scale = max(1.0, np.abs(x[0:8]).max())
    if _min_distance(x, ms) < _GUARD_FRACTION * scale:
        # repel the line search from near-collision points
        return 1e15, np.zeros(16)
    H, g = _energy_grad_x(x, ms)
    c = _constraint_x(x, target)
    J = _constraint_jac_x(x)
    w = lam + rho * c
    val = H + np.dot(lam, c) + 0.5 * rho * np.dot(c, c)
    grad = g + J.T @ w
    return val, grad


def _projected_gradient_norm(x: np.ndarray, ms: Masses) -> float:
    _, g = _energy_grad_x(x, ms)
    J = _constraint_jac_x(x)
    # remove the component of g spanned by the constraint normals
    y, *_ = np.linalg.lstsq(J.T, g, rcond=None)
    return float(np.linalg.norm(g - J.T @ y))


@dataclass
class _RestartOutcome:
    x: np.ndarray
    H: float
    residual: float
    pgnorm: float
    ok: bool


def _kkt_polish(x, lam, ms, target6):
    """Newton-polish the stationarity system grad H + J^T lam = 0, c = 0."""

    def system(z):
        xx, ll = z[:16], z[16:]
        _, g = _energy_grad_x(xx, ms)
        J = _constraint_jac_x(xx)
        return np.concatenate([g + J.T @ ll, _constraint_x(xx, target6)])

    z0 = np.concatenate([x, lam])
    sol = optimize.root(system, z0, method="hybr", tol=1e-13)
    xs = sol.x[:16]
    step = np.linalg.norm(xs - x) / max(1.0, np.linalg.norm(x))
    if step > 0.2:  # polish wandered off; keep the augmented-Lagrangian point
        return x, lam
    scale = max(1.0, np.abs(xs[0:8]).max())
    if _min_distance(xs, ms) < 1e3 * _GUARD_FRACTION * scale:
        return x, lam
    return xs, sol.x[16:]


def _near_guard(x: np.ndarray, ms: Masses) -> bool:
    scale = max(1.0, np.abs(x[0:8]).max())
    return _min_distance(x, ms) < 1e3 * _GUARD_FRACTION * scale


def _run_restart(x0, ms, target, cfg: MinimizeConfig) -> _RestartOutcome:
    """One augmented-Lagrangian solve with dive safeguards.

    Off the constraint manifold the objective is unbounded below (a binary
    can collapse while the violation saturates near the smaller target
    magnitude, so the quadratic penalty caps out).  An inner result whose
    violation jumps to that saturation scale, or that approaches the
    collision guard, is rejected and retried from the previous iterate with
    a stiffer penalty, which raises the barrier into that funnel.
    """
    lam = np.zeros(6)
    rho = cfg.penalty0
    x = np.asarray(x0, dtype=float)
    target6 = target.components
    tol_c = cfg.constraint_tol * (1.0 + np.linalg.norm(target6))
    l1t, _ = spectral_values(target)
    cnorm_prev = max(float(np.linalg.norm(_constraint_x(x, target6))), tol_c)

    outer = 0
    retries = 0
    while outer < cfg.max_outer:
        res = optimize.minimize(
            _augmented,
            x,
            args=(ms, target6, lam, rho),
            jac=True,
            method="L-BFGS-B",
            options={
                "maxiter": cfg.inner_maxiter,
                "ftol": 1e-16,
                "gtol": cfg.inner_tol,
            },
        )
        xc = res.x
        finite = bool(np.all(np.isfinite(xc)))
        cnorm = float(np.linalg.norm(_constraint_x(xc, target6))) if finite else np.inf
        dived = (
            not finite
            or _near_guard(xc, ms)
            or cnorm > 0.6 * l1t + 10.0 * cnorm_prev
        )
        if dived:
            retries += 1
            if retries > 12:
                return _RestartOutcome(x0, np.inf, np.inf, np.inf, ok=False)
            rho = min(rho * cfg.penalty_factor, 1e12)
            continue

        outer += 1
        x = xc
        c = _constraint_x(x, target6)
        lam = lam + rho * c
        if cnorm <= tol_c:
            break
        if cnorm > 0.25 * cnorm_prev:
            rho = min(rho * cfg.penalty_factor, 1e12)
        cnorm_prev = cnorm

    if cfg.polish:
        x, lam = _kkt_polish(x, lam, ms, target6)

    scale = max(1.0, np.abs(x[0:8]).max())
    if _min_distance(x, ms) < 1e3 * _GUARD_FRACTION * scale:
        return _RestartOutcome(x, np.inf, np.inf, np.inf, ok=False)

    H, _ = _energy_grad_x(x, ms)
    residual = float(np.linalg.norm(_constraint_x(x, target6)))
    pgnorm = _projected_gradient_norm(x, ms)
    return _RestartOutcome(x, H, residual, pgnorm, ok=True)


# ---------------------------------------------------------------------------
# seeds


def _double_circular_seed(ms: Masses, pair, l_binary, l_outer, binary_planes) -> np.ndarray:
    """Tight circular binary plus circular outer orbit of the third body.

    ``binary_planes`` chooses which coordinate planes hold the binary and the
    outer rotation ((0,1),(2,3) or swapped), matching the plane that carries
    the corresponding magnitude in the target bivector.
    """
    from .escape import PAIR_ORDER

    order = PAIR_ORDER[pair]
    pm = ms.permuted(order)
    (bp, bv), (op, ov) = binary_planes

    e = np.eye(4)
    q, p = circular_binary(pm.m1, pm.m2, l_binary, (e[bp], e[bv]))

    m12 = pm.m1 + pm.m2
    R = circular_radius(m12, pm.m3, l_outer)
    Q = R * e[op]
    P = (l_outer / R) * e[ov]

    x_perm = np.concatenate([q, Q, p, P])
    if order == (1, 2, 3):
        return x_perm
    # express the permuted Jacobi state in original body order
    st = from_jacobi(_x_to_jacobi(x_perm, pm))
    inverse = np.argsort(np.array(order))
    original = State(ms, st.positions[inverse], st.velocities[inverse])
    return _jacobi_to_x(to_jacobi(original))


_SEED_VARIANTS = tuple(
    (pair, swap) for pair in ((1, 2), (1, 3), (2, 3)) for swap in (False, True)
)


def _structured_seed(ms: Masses, l1, l2, variant) -> np.ndarray:
    pair, swap = variant
    if swap:  # the binary carries the larger magnitude, planes exchanged
        return _double_circular_seed(ms, pair, l2, l1, ((2, 3), (0, 1)))
    return _double_circular_seed(ms, pair, l1, l2, ((0, 1), (2, 3)))


def _random_seed(rng, ms: Masses, target: Bivector4, l1, l2, variant) -> np.ndarray:
    """Jittered hierarchical configuration with momenta re-matched to the target.

    The configuration is a 15%-perturbed copy of the structured seed for the
    given (pair, magnitude) variant; the momenta solve the linear
    least-squares system that restores the target bivector, so the seed is
    feasible up to the rank deficiency of the jittered configuration.
    """
    x = _structured_seed(ms, l1, l2, variant).copy()
    x[0:8] *= 1.0 + 0.15 * rng.standard_normal(8)
    x[8:16] *= 1.0 + 0.15 * rng.standard_normal(8)
    J = _constraint_jac_x(x)
    A = np.concatenate([J[:, 8:12], J[:, 12:16]], axis=1)
    sol, *_ = np.linalg.lstsq(A, target.components, rcond=None)
    x[8:12] = sol[:4]
    x[12:16] = sol[4:]
    return x


def _seed_pool(ms: Masses, target: Bivector4, l1, l2, cfg: MinimizeConfig) -> list[np.ndarray]:
    """Structured seeds for all six cluster variants, one escape state, then
    stratified random jitters cycling through the variants."""
    rng = np.random.default_rng(cfg.rng_seed)
    seeds = [_structured_seed(ms, l1, l2, v) for v in _SEED_VARIANTS]

    esc = escape_state(
        EscapeParams(ms, (1, 2), 1, l1, l2, beta=circular_radius(ms.m1 + ms.m2, ms.m3, l2))
    )
    seeds.append(_jacobi_to_x(to_jacobi(esc)))

    idx = 0
    while len(seeds) < cfg.restarts:
        seeds.append(_random_seed(rng, ms, target, l1, l2, _SEED_VARIANTS[idx]))
        idx = (idx + 1) % len(_SEED_VARIANTS)
    return seeds


# ---------------------------------------------------------------------------
# public drivers


def _require_rank4(target: Bivector4) -> tuple[float, float]:
    l1, l2 = spectral_values(target)
    if l1 <= _RANK_TOL * (1.0 + l2):
        raise ValueError(
            "angular momentum target must have rank 4 "
            "(both rotation magnitudes nonzero)"
        )
    return l1, l2


def minimize_at_momentum(
    masses: Masses,
    target: Bivector4,
    config: MinimizeConfig = MinimizeConfig(),
    extra_seeds: list[np.ndarray] | None = None,
) -> MinResult:
    """Minimize the energy over states with the given rank-4 angular momentum.

    Runs the augmented-Lagrangian solver from ``config.restarts`` seeds and
    returns the lowest converged result (ties broken by constraint residual).
    ``restarts_agreeing`` counts restarts whose energy matches the best one
    to 1e-6 relative — evidence that the landscape floor was actually found.
    """
    l1, l2 = _require_rank4(target)
    seeds = _seed_pool(masses, target, l1, l2, config)
    if extra_seeds:
        seeds = list(extra_seeds) + seeds
    seeds = seeds[: max(config.restarts, 1)]

    outcomes = [_run_restart(s, masses, target, config) for s in seeds]

    tol_res = config.constraint_tol * (1.0 + target.norm)
    converged = [
        o
        for o in outcomes
        if o.ok and o.residual <= max(1e-8 * (1.0 + target.norm), tol_res * 10)
    ]
    pool = converged if converged else [o for o in outcomes if o.ok]
    if not pool:
        raise RuntimeError("no restart produced a usable state")
    best = min(pool, key=lambda o: (o.H, o.residual))

    agreeing = sum(
        1 for o in outcomes if o.ok and abs(o.H - best.H) <= 1e-6 * abs(best.H)
    )
    is_converged = bool(
        converged
        and best.residual <= 1e-8 * (1.0 + target.norm)
        and best.pgnorm <= 1e-7 * (1.0 + abs(best.H))
    )
    state = from_jacobi(_x_to_jacobi(best.x, masses))
    return MinResult(
        state=state,
        H_min=best.H,
        constraint_residual=best.residual,
        restarts_agreeing=agreeing,
        converged=is_converged,
        projected_gradient=best.pgnorm,
        restart_energies=[o.H for o in outcomes],
    )


def sweep_momentum_ratio(
    masses: Masses,
    k_grid,
    config: MinimizeConfig = MinimizeConfig(),
) -> list[SweepPoint]:
    """Minimal-branch samples of the scaled energy-momentum diagram.

    For each momentum ratio k the target bivector has magnitudes
    l1 = chi_small_branch(k) and l2 = 1 - l1 (unit total), so the scaled
    energy is h = H_min.  Each point is warm-started from the previous
    minimizer; non-convergence is propagated per point.
    """
    points: list[SweepPoint] = []
    warm: np.ndarray | None = None
    for k in k_grid:
        l1 = chi_small_branch(float(k))
        l2 = 1.0 - l1
        c = np.zeros(6)
        c[0] = l1
        c[5] = l2
        target = Bivector4(c)
        extra = [warm] if warm is not None else None
        result = minimize_at_momentum(masses, target, config, extra_seeds=extra)
        if result.converged:
            warm = _jacobi_to_x(to_jacobi(result.state))
        points.append(
            SweepPoint(
                k=float(k),
                l1=l1,
                l2=l2,
                h=result.H_min * (l1 + l2) ** 2,
                H_min=result.H_min,
                converged=result.converged,
            )
        )
    return points
