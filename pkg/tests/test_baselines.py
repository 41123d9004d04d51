import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kepler_mtpi import baselines
from kepler_mtpi.baselines import FixedStepMethod, W0, W1
from kepler_mtpi.core import FirstIntegrals, PhaseState, PhysParams, Vec3
from kepler_mtpi.diagnostics import integrals_batch
from kepler_mtpi.errors import ConvergenceError, DomainError, SingularityError

from conftest import REF_PERIOD, rel, vclose

UNIT = PhysParams(1.0, 1.0)
STEPPERS = list(baselines.STEP_FUNCTIONS.items())


def richardson_ratio(method, q0, p0, params, horizon, n):
    """|x_n - x_2n| / |x_2n - x_4n| for n, 2n, 4n steps over the horizon."""
    finals = [
        baselines.trajectory(method, q0, p0, params, horizon / (n * 2**i), n * 2**i)[-1, 2:8]
        for i in range(3)
    ]
    return np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])


class TestCoefficients:
    def test_triple_jump_sums_to_one(self):
        assert abs(2 * W1 + W0 - 1.0) <= 1e-15

    def test_triple_jump_cancels_third_order(self):
        assert abs(2 * W1**3 + W0**3) <= 1e-14

    def test_values(self):
        assert W1 == pytest.approx(1.3512071919596578, rel=1e-15)
        assert W0 == pytest.approx(-1.7024143839193153, rel=1e-15)


class TestSingleSteps:
    @pytest.mark.parametrize("method,fn", STEPPERS, ids=[m.value for m, _ in STEPPERS])
    def test_zero_step_identity(self, method, fn):
        s = PhaseState.of((1.2, -0.3, 0.4), (0.1, 0.9, -0.2), t=3.0)
        out = fn(s, UNIT, 0.0)
        assert out.q == s.q and out.p == s.p and out.t == 3.0

    @pytest.mark.parametrize("method,fn", STEPPERS, ids=[m.value for m, _ in STEPPERS])
    def test_time_advances_exactly(self, method, fn):
        s = PhaseState.of((1, 0, 0), (0, 1, 0), t=0.5)
        assert fn(s, UNIT, 0.25).t == 0.75

    @pytest.mark.parametrize("method,fn", STEPPERS, ids=[m.value for m, _ in STEPPERS])
    def test_origin_is_singular(self, method, fn):
        with pytest.raises(SingularityError):
            fn(PhaseState.of((0, 0, 0), (0, 1, 0)), UNIT, 0.1)

    @pytest.mark.parametrize("method,fn", STEPPERS, ids=[m.value for m, _ in STEPPERS])
    def test_step_matches_trajectory(self, method, fn):
        q0, p0 = (1.0, 0.0, 0.0), (0.0, 1.2, 0.1)
        s = PhaseState.of(q0, p0)
        for _ in range(25):
            s = fn(s, UNIT, 0.03)
        row = baselines.trajectory(method, q0, p0, UNIT, 0.03, 25)[-1]
        assert tuple(row[2:5]) == s.q.as_tuple() and tuple(row[5:8]) == s.p.as_tuple()

    def test_leapfrog_kick_drift_kick(self):
        s = PhaseState.of((2.0, 0.0, 0.0), (0.0, 0.5, 0.0))
        dt = 0.1
        p_half = 0.5 * 0.0 - dt / 2 * (1 / 4)
        q1 = Vec3(2.0 + dt * p_half, dt * 0.5, 0.0)
        r = q1.norm()
        a = q1 * (-1 / r**3)
        expected_p = Vec3(p_half, 0.5, 0.0) + a * (dt / 2)
        out = baselines.leapfrog_step(s, UNIT, dt)
        assert vclose(out.q, q1, 1e-15)
        assert vclose(out.p, expected_p, 1e-15)

    def test_leapfrog_reversible(self):
        s = PhaseState.of((1.3, 0.2, -0.1), (-0.2, 0.8, 0.05))
        fwd = baselines.leapfrog_step(s, UNIT, 0.05)
        back = baselines.leapfrog_step(PhaseState(fwd.q, -fwd.p), UNIT, 0.05)
        assert vclose(back.q, s.q, 1e-13)
        assert vclose(-back.p, s.p, 1e-13)

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(min_value=0.5, max_value=2.0),
        st.floats(min_value=0.6, max_value=1.3),
        st.floats(min_value=1e-3, max_value=0.05),
    )
    def test_symplectic_methods_reversible(self, r, v, dt):
        for fn in (baselines.leapfrog_step, baselines.composition4_step):
            s = PhaseState.of((r, 0.0, 0.1), (0.1, v, 0.0))
            out = s
            for _ in range(10):
                out = fn(out, UNIT, dt)
            out = PhaseState(out.q, -out.p)
            for _ in range(10):
                out = fn(out, UNIT, dt)
            assert vclose(out.q, s.q, 1e-12)
            assert vclose(-out.p, s.p, 1e-12)


class TestAccuracy:
    def test_rk4_circular_radius(self, circular):
        q0, p0, params = circular
        rows = baselines.trajectory("rk4", q0, p0, params, 1e-3, 1000)
        assert abs(np.linalg.norm(rows[-1, 2:5]) - 1.0) <= 1e-10

    @pytest.mark.parametrize(
        "method,order",
        [("rk4", 4), ("leapfrog", 2), ("composition4", 4)],
    )
    def test_richardson_order(self, method, order):
        ratio = richardson_ratio(method, (1, 0, 0), (0, 1.2, 0), UNIT, 1.0, 20)
        assert ratio == pytest.approx(2**order, rel=0.3)

    @pytest.mark.parametrize(
        "method,order",
        [("rk4", 4), ("leapfrog", 2), ("composition4", 4)],
    )
    def test_richardson_reference_orbit(self, ref_orbit, method, order):
        q0, p0, params = ref_orbit
        ratio = richardson_ratio(method, q0, p0, params, 0.1 * REF_PERIOD, 20)
        assert ratio == pytest.approx(2**order, rel=0.3)

    def test_time_column_exact(self):
        rows = baselines.trajectory("leapfrog", (1, 0, 0), (0, 1, 0), UNIT, 0.1, 50, t0=2.0)
        np.testing.assert_array_equal(rows[:, 1], 2.0 + np.arange(51) * 0.1)
        assert np.all(rows[:, 8] == 0.1)


class TestSymplecticBounds:
    # Constants fitted once at the coarser step and frozen
    C_LEAPFROG = 2.4631e-3
    C_COMPOSITION4 = 1.6980e-3

    @pytest.mark.parametrize(
        "method,dt,order,C",
        [
            ("leapfrog", 0.1, 2, C_LEAPFROG),
            ("leapfrog", 0.05, 2, C_LEAPFROG),
            ("composition4", 0.2, 4, C_COMPOSITION4),
            ("composition4", 0.1, 4, C_COMPOSITION4),
        ],
    )
    def test_energy_bounded_no_drift(self, circular, method, dt, order, C):
        q0, p0, params = circular
        rows = baselines.trajectory(method, q0, p0, params, dt, 100_000)
        _, E, _, _ = integrals_batch(rows[:, 2:5], rows[:, 5:8], params)
        dev = np.abs(E - E[0]) / abs(E[0])
        assert dev.max() <= 2 * C * dt**order
        tenth = len(dev) // 10
        assert dev[-tenth:].max() <= 1.5 * dev[:tenth].max()

    @pytest.mark.parametrize("method", ["leapfrog", "composition4"])
    def test_angular_momentum_reference(self, ref_orbit, method):
        q0, p0, params = ref_orbit
        dt = 0.02
        n = math.ceil(REF_PERIOD / dt)
        rows = baselines.trajectory(method, q0, p0, params, dt, n, stride=7)
        L, _, _, _ = integrals_batch(rows[:, 2:5], rows[:, 5:8], params)
        Ln = np.linalg.norm(L, axis=1)
        assert np.max(np.abs(Ln - Ln[0])) / Ln[0] <= 1e-12


class TestTrajectory:
    def test_rejects_negative_steps(self):
        with pytest.raises(DomainError):
            baselines.trajectory("rk4", (1, 0, 0), (0, 1, 0), UNIT, 0.1, -1)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            baselines.trajectory("euler", (1, 0, 0), (0, 1, 0), UNIT, 0.1, 1)

    def test_stride_rows(self):
        full = baselines.trajectory("rk4", (1, 0, 0), (0, 1, 0), UNIT, 0.1, 10)
        strided = baselines.trajectory("rk4", (1, 0, 0), (0, 1, 0), UNIT, 0.1, 10, stride=4)
        np.testing.assert_array_equal(strided, full[[0, 4, 8, 10]])

    def test_enum_codes_distinct(self):
        assert len({m.code for m in FixedStepMethod}) == 3


class TestOracle:
    def test_zero_time(self, ref_orbit):
        q0, p0, params = ref_orbit
        s = baselines.oracle_state_at(q0, p0, params, 0.0)
        assert s.q == Vec3.of(q0) and s.p == Vec3.of(p0) and s.t == 0.0

    def test_circular_period(self, circular):
        q0, p0, params = circular
        s = baselines.oracle_state_at(q0, p0, params, 2 * math.pi, 1e-10)
        assert vclose(s.q, q0, 1e-10)
        assert s.t == 2 * math.pi

    def test_reference_period(self, ref_orbit):
        q0, p0, params = ref_orbit
        s = baselines.oracle_state_at(q0, p0, params, REF_PERIOD, 1e-9)
        assert vclose(s.q, q0, 1e-9)
        ref = FirstIntegrals.from_state(PhaseState.of(q0, p0), params)
        assert rel(FirstIntegrals.from_state(s, params).E, ref.E) <= 1e-9

    def test_backward_time(self, circular):
        q0, p0, params = circular
        s = baselines.oracle_state_at(q0, p0, params, -math.pi / 2, 1e-10)
        assert vclose(s.q, (0, -1, 0), 1e-10)

    @pytest.mark.parametrize("tol", [1e-13, 1e-3, 0.0])
    def test_tolerance_domain(self, circular, tol):
        with pytest.raises(DomainError):
            baselines.oracle_state_at(*circular[:2], circular[2], 1.0, tol)

    def test_cap_raises(self):
        # plunge orbit: the pericentre passage is too sharp for the step cap
        with pytest.raises((ConvergenceError, SingularityError)):
            baselines.oracle_state_at((1, 0, 0), (0, 1e-7, 0), UNIT, 3.0, 1e-12)
