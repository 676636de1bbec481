import numpy as np
import pytest

from threebody4d.bivectors import Bivector4, wedge
from threebody4d.escape import EscapeParams, escape_state
from threebody4d.kepler import energy_at_infinity
from threebody4d.minimize import (
    MinimizeConfig,
    _jacobi_to_x,
    _run_restart,
    energy_and_gradient,
    minimize_at_momentum,
    momentum_residual_and_jacobian,
    sweep_momentum_ratio,
)
from threebody4d.phase import JacobiState, Masses, angular_momentum, energy, to_jacobi

E = np.eye(4)
FIG_MASSES = Masses(0.5, 1 / 3, 1 / 6)


def target_bivector(l1, l2) -> Bivector4:
    return l1 * wedge(E[0], E[1]) + l2 * wedge(E[2], E[3])


def random_jacobi(rng, masses=None) -> JacobiState:
    masses = masses or Masses(*rng.uniform(0.3, 2.0, size=3))
    while True:
        q = rng.normal(size=4)
        Q = rng.normal(size=4) * 2.0
        j = JacobiState(masses, q, Q, rng.normal(size=4), rng.normal(size=4))
        from threebody4d.phase import jacobi_distances

        if jacobi_distances(j).min() > 0.3:
            return j


def fd_gradient(f, x, h):
    g = np.zeros_like(x)
    for i in range(len(x)):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


class TestDerivatives:
    def test_kinetic_gradient_blocks(self):
        rng = np.random.default_rng(51)
        j = random_jacobi(rng)
        _, g = energy_and_gradient(j)
        np.testing.assert_allclose(g[8:12], j.p / j.masses.mu, rtol=1e-14)
        np.testing.assert_allclose(g[12:16], j.P / j.masses.nu, rtol=1e-14)
        rest = JacobiState(j.masses, j.q, j.Q, np.zeros(4), np.zeros(4))
        _, g0 = energy_and_gradient(rest)
        np.testing.assert_allclose(g0[8:16], np.zeros(8), atol=1e-15)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(52)
        for _ in range(30):
            j = random_jacobi(rng)
            x = _jacobi_to_x(j)
            ms = j.masses

            def f(xv):
                return energy_and_gradient(
                    JacobiState(ms, xv[0:4], xv[4:8], xv[8:12], xv[12:16])
                )[0]

            _, g = energy_and_gradient(j)
            g_fd = fd_gradient(f, x, 1e-6 * max(1.0, np.abs(x).max()))
            np.testing.assert_allclose(
                g, g_fd, rtol=1e-5, atol=1e-8 * (1 + np.abs(g).max())
            )

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(53)
        target = target_bivector(1.0, 1.0)
        for _ in range(30):
            j = random_jacobi(rng)
            x = _jacobi_to_x(j)
            ms = j.masses
            _, J = momentum_residual_and_jacobian(j, target)

            for row in range(6):

                def f(xv, row=row):
                    jj = JacobiState(ms, xv[0:4], xv[4:8], xv[8:12], xv[12:16])
                    return momentum_residual_and_jacobian(jj, target)[0][row]

                row_fd = fd_gradient(f, x, 1e-6 * max(1.0, np.abs(x).max()))
                np.testing.assert_allclose(
                    J[row], row_fd, rtol=1e-5, atol=1e-8 * (1 + np.abs(J).max())
                )

    def test_jacobian_bilinear_pattern(self):
        # first residual row is q1 p2 - q2 p1 plus the outer-pair term
        rng = np.random.default_rng(54)
        j = random_jacobi(rng)
        _, J = momentum_residual_and_jacobian(j, target_bivector(1.0, 1.0))
        np.testing.assert_allclose(J[0, 0:4], [j.p[1], -j.p[0], 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(J[0, 8:12], [-j.q[1], j.q[0], 0.0, 0.0], atol=1e-15)

    def test_escape_state_is_feasible(self):
        params = EscapeParams(FIG_MASSES, (1, 2), 1, 1.0, 1.0, beta=500.0)
        j = to_jacobi(escape_state(params))
        c, _ = momentum_residual_and_jacobian(j, target_bivector(1.0, 1.0))
        assert np.abs(c).max() <= 1e-12


class TestMinimizeAtMomentum:
    def test_rank_deficient_target_rejected(self):
        with pytest.raises(ValueError, match="rank 4"):
            minimize_at_momentum(FIG_MASSES, wedge(E[0], E[1]))

    def test_equal_masses_below_critical(self):
        cfg = MinimizeConfig(restarts=8, rng_seed=0)
        res = minimize_at_momentum(Masses(1, 1, 1), target_bivector(1.0, 1.0), cfg)
        assert res.converged
        assert res.H_min < -0.25
        assert res.constraint_residual <= 1e-8 * (1 + np.sqrt(2.0))
        assert (angular_momentum(res.state) - target_bivector(1.0, 1.0)).norm <= 1e-8
        assert energy(res.state) == pytest.approx(res.H_min, rel=1e-10)

    def test_descends_from_large_separation_escape_seed(self):
        # a far-out escape state must fall strictly below its limit energy
        params = EscapeParams(FIG_MASSES, (1, 2), 1, 1.0, 1.0, beta=2000.0)
        x0 = _jacobi_to_x(to_jacobi(escape_state(params)))
        cfg = MinimizeConfig(restarts=4, rng_seed=0)
        out = _run_restart(x0, FIG_MASSES, target_bivector(1.0, 1.0), cfg)
        assert out.ok
        assert out.H < energy_at_infinity(FIG_MASSES, (1, 2), 1.0)

    def test_anisoclinic_target(self):
        cfg = MinimizeConfig(restarts=8, rng_seed=1)
        target = target_bivector(0.5, 1.5)
        res = minimize_at_momentum(FIG_MASSES, target, cfg)
        assert res.converged
        bound = min(
            energy_at_infinity(FIG_MASSES, pr, 0.5) for pr in ((1, 2), (1, 3), (2, 3))
        )
        assert res.H_min < bound
        assert (angular_momentum(res.state) - target).norm <= 1e-8 * (1 + target.norm)


class TestSweep:
    def test_endpoint_and_monotonicity(self):
        cfg = MinimizeConfig(restarts=7, rng_seed=0)
        pts = sweep_momentum_ratio(Masses(1, 1, 1), [0.2, 0.25], cfg)
        assert all(p.converged for p in pts)
        assert pts[-1].l1 == pytest.approx(0.5)
        assert pts[-1].l2 == pytest.approx(0.5)
        # scaled energy rises toward the isoclinic endpoint
        assert pts[0].h < pts[1].h < 0.0
