import numpy as np
import pytest

from threebody4d.dynamics import (
    IntegratorConfig,
    accelerations,
    characteristic_period,
    integrate,
    shape_distance,
    stability_probe,
)
from threebody4d.kepler import circular_binary
from threebody4d.phase import (
    Masses,
    State,
    angular_momentum,
    pairwise_distances,
    to_jacobi,
)

E = np.eye(4)


def collinear_rest_state() -> State:
    pos = np.zeros((3, 4))
    pos[0, 0] = 1.0
    pos[1, 0] = -1.0
    return State(Masses(1, 1, 1), pos, np.zeros((3, 4)))


def random_state(rng) -> State:
    masses = Masses(*rng.uniform(0.3, 2.0, size=3))
    while True:
        s = State.recentred(masses, rng.normal(size=(3, 4)), rng.normal(size=(3, 4)))
        if pairwise_distances(s).min() > 0.3:
            return s


def circular_binary_state(m3=1e-12, far=1e2) -> State:
    # two unit masses on the circular orbit, a nearly massless third far away
    masses = Masses(1.0, 1.0, m3)
    q, p = circular_binary(1.0, 1.0, 1.0, (E[0], E[1]))
    pos = np.zeros((3, 4))
    vel = np.zeros((3, 4))
    pos[0] = -q / 2
    pos[1] = q / 2
    pos[2] = far * E[2]
    vel[0] = -p  # p = mu * qdot with mu = 1/2
    vel[1] = p
    return State.recentred(masses, pos, vel)


def eccentric_test_state() -> State:
    pos = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [-1.0, 0.0, 0.2, 0.0],
            [0.1, 0.3, 2.0, 0.0],
        ]
    )
    vel = np.array(
        [
            [0.0, 0.4, 0.0, 0.05],
            [0.0, -0.3, 0.1, 0.0],
            [0.05, 0.0, 0.0, 0.2],
        ]
    )
    return State.recentred(Masses(1.0, 0.8, 0.5), pos, vel)


class TestAccelerations:
    def test_collinear_example(self):
        acc = accelerations(collinear_rest_state())
        np.testing.assert_allclose(acc[0], [-1.25, 0, 0, 0], atol=1e-14)
        np.testing.assert_allclose(acc[1], [1.25, 0, 0, 0], atol=1e-14)
        np.testing.assert_allclose(acc[2], np.zeros(4), atol=1e-14)

    def test_symmetric_midpoint_feels_nothing(self):
        acc = accelerations(collinear_rest_state())
        np.testing.assert_allclose(acc[2], np.zeros(4), atol=1e-15)

    def test_matches_potential_gradient(self):
        rng = np.random.default_rng(61)
        h = 1e-6
        for _ in range(20):
            s = random_state(rng)
            acc = accelerations(s)
            m = s.masses.as_array()
            for i in range(3):
                for axis in range(4):
                    pp = s.positions.copy()
                    pm = s.positions.copy()
                    pp[i, axis] += h
                    pm[i, axis] -= h
                    # potential is translation invariant; bypass the CoM check
                    dv = (
                        _potential_of(s.masses, pp) - _potential_of(s.masses, pm)
                    ) / (2 * h)
                    assert acc[i, axis] == pytest.approx(
                        -dv / m[i], rel=1e-6, abs=1e-6
                    )


def _potential_of(masses, pos):
    from threebody4d.phase import _potential, pairwise_distance_array

    return _potential(masses, pairwise_distance_array(pos))


class TestIntegrate:
    def test_circular_binary_period(self):
        # analytic orbit: separation 2, relative speed 1, period 4 pi
        s = circular_binary_state()
        period = 4 * np.pi
        cfg = IntegratorConfig(
            dt=period / 10_000,
            t_end=period,
            scheme="fourth-order-composition",
            record_every=10,
        )
        traj = integrate(s, cfg)
        rel = np.array([st.positions[1] - st.positions[0] for st in traj.states])
        angle = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
        omega = np.polyfit(traj.times, angle, 1)[0]
        assert 2 * np.pi / abs(omega) == pytest.approx(period, rel=1e-6)
        radii = np.linalg.norm(rel, axis=1)
        np.testing.assert_allclose(radii, 2.0, rtol=1e-9)

    def test_characteristic_period_matches_binary(self):
        assert characteristic_period(circular_binary_state()) == pytest.approx(
            4 * np.pi, rel=1e-6
        )

    @pytest.mark.parametrize(
        "scheme,order", [("leapfrog", 2), ("fourth-order-composition", 4)]
    )
    def test_energy_drift_order(self, scheme, order):
        s = eccentric_test_state()
        drifts = []
        for dt in (0.02, 0.01):
            cfg = IntegratorConfig(dt=dt, t_end=8.0, scheme=scheme, record_every=5)
            traj = integrate(s, cfg)
            assert not traj.aborted
            drifts.append(np.abs(traj.energy_drift).max())
        ratio = drifts[0] / drifts[1]
        assert ratio == pytest.approx(2.0**order, rel=0.5)

    def test_angular_momentum_at_round_off(self):
        s = eccentric_test_state()
        for scheme in ("leapfrog", "fourth-order-composition"):
            cfg = IntegratorConfig(dt=0.01, t_end=20.0, scheme=scheme, record_every=50)
            traj = integrate(s, cfg)
            steps = 20.0 / 0.01
            budget = 1e-10 * (1.0 + angular_momentum(s).norm) * max(1.0, steps * 1e-16 / 1e-10)
            assert traj.momentum_drift.max() <= budget

    def test_time_reversal(self):
        s = eccentric_test_state()
        cfg = IntegratorConfig(dt=0.005, t_end=5.0, scheme="leapfrog", record_every=1000)
        fwd = integrate(s, cfg)
        end = fwd.states[-1]
        back = State(end.masses, end.positions, -end.velocities)
        ret = integrate(back, cfg).states[-1]
        n_steps = 2 * round(5.0 / 0.005)
        tol = 100 * n_steps * 1e-16 * np.abs(s.positions).max()
        np.testing.assert_allclose(ret.positions, s.positions, atol=max(tol, 1e-10))
        np.testing.assert_allclose(-ret.velocities, s.velocities, atol=max(tol, 1e-10))

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(62)
        r, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        s = eccentric_test_state()
        rotated = State(s.masses, s.positions @ r.T, s.velocities @ r.T)
        cfg = IntegratorConfig(dt=0.01, t_end=3.0, scheme="fourth-order-composition",
                               record_every=300)
        end_plain = integrate(s, cfg).states[-1]
        end_rot = integrate(rotated, cfg).states[-1]
        np.testing.assert_allclose(
            end_rot.positions, end_plain.positions @ r.T, atol=1e-10
        )

    def test_close_encounter_aborts_with_partial_trajectory(self):
        # head-on plunge of a tight pair
        pos = np.zeros((3, 4))
        pos[0, 0] = 0.01
        pos[1, 0] = -0.01
        pos[2, 2] = 1e8
        vel = np.zeros((3, 4))
        vel[0, 0] = -1.0
        vel[1, 0] = 1.0
        s = State.recentred(Masses(1, 1, 1e-9), pos, vel)
        traj = integrate(s, IntegratorConfig(dt=1e-3, t_end=1.0, scheme="leapfrog"))
        assert traj.aborted
        assert "close encounter" in traj.abort_reason
        assert len(traj.states) >= 1

    def test_config_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.0, t_end=1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.1, t_end=0.01)
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.1, t_end=1.0, scheme="euler")


@pytest.fixture(scope="module")
def re_state():
    # doubly rotating equilateral relative equilibrium of equal masses
    from threebody4d.bivectors import wedge
    from threebody4d.minimize import MinimizeConfig, minimize_at_momentum

    target = wedge(E[0], E[1]) + wedge(E[2], E[3])
    res = minimize_at_momentum(
        Masses(1, 1, 1), target, MinimizeConfig(restarts=7, rng_seed=0)
    )
    return res.state


class TestStabilityProbe:
    def test_zero_perturbation_stays_at_round_off(self, re_state):
        period = characteristic_period(re_state)
        cfg = IntegratorConfig(dt=period / 2000, t_end=2 * period,
                               scheme="fourth-order-composition", record_every=100)
        report = stability_probe(re_state, 0.0, 2, cfg)
        for trial in report.trials:
            assert trial.initial_offset <= 1e-12
            assert trial.max_shape_distance <= 1e-9
            assert trial.passed

    def test_small_perturbation_bounded(self, re_state):
        period = characteristic_period(re_state)
        cfg = IntegratorConfig(dt=period / 2000, t_end=3 * period, scheme="leapfrog",
                               record_every=50)
        report = stability_probe(re_state, 1e-4, 3, cfg, rng_seed=1)
        assert report.passed
        assert report.delta == 1e-4

    def test_report_never_claims_instability(self, re_state):
        period = characteristic_period(re_state)
        cfg = IntegratorConfig(dt=period / 1000, t_end=period, scheme="leapfrog",
                               record_every=50)
        report = stability_probe(re_state, 0.5, 2, cfg, rng_seed=2)
        text = report.summary().lower()
        assert "not a proof" in text
        assert "within bound" in text
        assert "unstable" not in text

    def test_momentum_restored_exactly(self, re_state):
        from threebody4d.dynamics import _restore_momentum
        from threebody4d.phase import JacobiState

        rng = np.random.default_rng(64)
        L0 = angular_momentum(re_state)
        j = to_jacobi(re_state)
        perturbed = JacobiState(
            j.masses,
            j.q * (1 + 1e-3 * rng.standard_normal(4)),
            j.Q * (1 + 1e-3 * rng.standard_normal(4)),
            j.p * (1 + 1e-3 * rng.standard_normal(4)),
            j.P * (1 + 1e-3 * rng.standard_normal(4)),
        )
        assert (angular_momentum(perturbed) - L0).norm > 1e-5
        fixed = _restore_momentum(perturbed, L0)
        assert (angular_momentum(fixed) - L0).norm <= 1e-13 * (1 + L0.norm)


class TestShapeDistance:
    def test_zero_for_rotated_copy(self):
        rng = np.random.default_rng(63)
        s = eccentric_test_state()
        r, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        rotated = State(s.masses, s.positions @ r.T, s.velocities @ r.T)
        assert shape_distance(s, rotated) <= 1e-12

    def test_detects_shape_change(self):
        s = eccentric_test_state()
        bigger = State(s.masses, 1.1 * s.positions, s.velocities)
        assert shape_distance(s, bigger) > 0.1
