"""Acceptance criteria, one pass/fail line each in the terminal summary.

Run with ``pytest tests/test_acceptance.py`` and read the
"acceptance criteria" section at the end of the output.
"""
import dataclasses
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from kepler_mtpi import anomaly, baselines, bench, mtpi
from kepler_mtpi.anomaly import build_frame, epoch_from_anomaly, signed_true_anomaly, true_anomaly_at_step
from kepler_mtpi.core import PhaseState, PhysParams, Vec3
from kepler_mtpi.diagnostics import ErrorTracker
from kepler_mtpi.errors import DegenerateOrbitError, StepTooLargeError

from conftest import REF_H0, REF_P0, REF_PARAMS, REF_PERIOD, REF_Q0

criterion = pytest.mark.criterion


def note(record_property, text):
    record_property("measured", text)


@pytest.fixture(scope="module")
def delta():
    return mtpi.init(REF_Q0, REF_P0, REF_H0, REF_PARAMS).angles.delta


@pytest.fixture(scope="module")
def period_steps(delta):
    return math.ceil(math.pi / delta)


@pytest.fixture(scope="module")
def mtpi_period_states(period_steps):
    """Explicit MTPI states for one period (aux points, momenta, steps)."""
    s = mtpi.init(REF_Q0, REF_P0, REF_H0, REF_PARAMS)
    states = [s]
    for _ in range(period_steps + 1):
        s, _ = mtpi.step(s)
        states.append(s)
    return states


@pytest.fixture(scope="module")
def ref_runs():
    """The four methods at the reference step sizes over one period, every step observed."""
    results = bench.run_comparison(bench.paper_scenarios(periods=1.0, stride=1))
    return {r.scenario.method: r for r in results}


@criterion(1, "MTPI conserves E, |L|, |A| and directions of L, A over 10 periods")
def test_exact_conservation(record_property, delta):
    n = math.ceil(10 * math.pi / delta)
    start = time.perf_counter()
    rows, _ = mtpi.trajectory(REF_Q0, REF_P0, REF_H0, REF_PARAMS, n)
    tracker = ErrorTracker(REF_Q0, REF_P0, REF_PARAMS).observe_rows(rows[1:])
    elapsed = time.perf_counter() - start
    s = tracker.summarize()
    note(record_property, f"steps={n} E={s.e_E:.2e} L={s.e_L:.2e} A={s.e_A:.2e} "
                          f"dirL={s.e_dirL:.2e} dirA={s.e_dirA:.2e} time={elapsed:.2f}s")
    assert n > 31_400
    assert s.e_E <= 1e-11 and s.e_L <= 1e-11 and s.e_A <= 1e-11
    assert s.e_dirL <= 1e-12 and s.e_dirA <= 1e-12
    assert elapsed < 1.0


@criterion(2, "direction error of L below 1e-14 for every method over one period")
def test_direction_of_L(record_property, ref_runs):
    sups = {m: r.summary.e_dirL for m, r in ref_runs.items()}
    note(record_property, " ".join(f"{m}={v:.1e}" for m, v in sups.items()))
    assert set(sups) == {"mtpi", "rk4", "leapfrog", "composition4"}
    for m, v in sups.items():
        assert v <= 1e-14, m


def angle(a, b):
    return math.atan2(a.cross(b).norm(), a.dot(b))


@criterion(3, "constant angular increment 2 delta and radius scaling over one period")
def test_constant_angular_increment(record_property, mtpi_period_states, delta):
    states = mtpi_period_states
    qs = [s.position() for s in states]
    worst_angle = max(abs(angle(a, b) - 2 * delta) for a, b in zip(qs, qs[1:]))
    worst_scale = max(
        abs(c.r.norm() * a.h - a.r.norm() * b.h) / (a.r.norm() * b.h)
        for a, b, c in zip(states, states[1:], states[2:])
    )
    note(record_property, f"angle={worst_angle:.1e} rad scaling={worst_scale:.1e}")
    assert worst_angle <= 1e-10
    assert worst_scale <= 1e-12


@criterion(4, "auxiliary point recomputed from (q, p, h) matches the stepped one")
def test_aux_consistency(record_property, mtpi_period_states):
    worst = 0.0
    for s in mtpi_period_states[1:]:
        _, r = mtpi.compute_aux(s.position(), s.p, s.h, s.params)
        worst = max(worst, (r - s.r).norm() / s.r.norm())
    note(record_property, f"rel={worst:.1e}")
    assert worst <= 1e-10


@criterion(5, "MTPI clock vs Kepler-equation epoch, and position vs oracle")
def test_epoch_clock(record_property, delta, period_steps):
    frame = build_frame(REF_Q0, REF_P0, REF_PARAMS)
    rows, _ = mtpi.trajectory(REF_Q0, REF_P0, REF_H0, REF_PARAMS, period_steps)
    nu0 = signed_true_anomaly(frame, REF_Q0)
    gap = max(
        abs(rows[n, 1] - epoch_from_anomaly(frame, true_anomaly_at_step(frame, nu0, n, delta), 0.0, nu0))
        for n in range(period_steps + 1)
    ) / frame.period
    note(record_property, f"clock={gap:.2e} T")
    assert gap <= 1e-5


@criterion(5, "MTPI clock vs Kepler-equation epoch, and position vs oracle")
def test_epoch_position(record_property, period_steps):
    rows, _ = mtpi.trajectory(REF_Q0, REF_P0, REF_H0, REF_PARAMS, period_steps)
    t_end = float(rows[-1, 1])
    ref = baselines.oracle_state_at(REF_Q0, REF_P0, REF_PARAMS, t_end, 1e-9)
    err = (Vec3(*rows[-1, 2:5]) - ref.q).norm() / ref.q.norm()
    note(record_property, f"position={err:.1e} at t={t_end:.2f}")
    assert err <= 1e-5


@criterion(6, "steps per period: pi/delta for MTPI, T/dt for fixed-step methods")
def test_steps_per_period(record_property):
    scenarios = [dataclasses.replace(sc, n_periods=None, n_steps=1) for sc in bench.paper_scenarios()]
    results = {r.scenario.method: r for r in bench.run_comparison(scenarios)}
    spp = {m: r.steps_per_period for m, r in results.items()}
    note(record_property, " ".join(f"{m}={v:.5g}" for m, v in spp.items()))
    assert spp["mtpi"] == pytest.approx(3141.6, abs=0.05)
    assert round(spp["mtpi"], -1) == 3.14e3
    assert spp["mtpi"] == pytest.approx(math.pi / results["mtpi"].delta, rel=1e-9)
    assert spp["rk4"] == pytest.approx(4.53e4, rel=0.01)
    assert spp["composition4"] == pytest.approx(4.53e4, rel=0.01)
    assert spp["leapfrog"] == pytest.approx(9.07e4, rel=0.01)


@criterion(7, "Richardson step-halving ratios over 0.1 period")
@pytest.mark.parametrize("method,order", [("rk4", 4), ("leapfrog", 2), ("composition4", 4)])
def test_richardson(record_property, method, order):
    horizon, n = 0.1 * REF_PERIOD, 20
    finals = [
        baselines.trajectory(method, REF_Q0, REF_P0, REF_PARAMS, horizon / (n * 2**i), n * 2**i)[-1, 2:8]
        for i in range(3)
    ]
    ratio = np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])
    note(record_property, f"{method}={ratio:.2f}")
    assert ratio == pytest.approx(2**order, rel=0.3)


@criterion(8, "MTPI energy and LRL errors 1e3 below RK4 and leapfrog after one period")
def test_hierarchy(record_property, ref_runs):
    s = {m: r.summary for m, r in ref_runs.items()}
    note(record_property, " ".join(f"{m}:E={v.e_E:.1e},A={v.e_A:.1e}" for m, v in s.items()))
    for other in ("rk4", "leapfrog"):
        assert s["mtpi"].e_E * 1e3 <= s[other].e_E
        assert s["mtpi"].e_A * 1e3 <= s[other].e_A


@criterion(9, "Kepler solver round trip within 1e-12 in under 0.1 s")
def test_kepler_round_trip(record_property):
    grid = [2 * math.pi * i / 100 for i in range(100)]
    start = time.perf_counter()
    worst = max(
        abs(anomaly.solve_kepler(anomaly.kepler_M(u, e), e) - u)
        for e in (0.0, 0.1, 0.5, 0.9, 0.99)
        for u in grid
    )
    elapsed = time.perf_counter() - start
    note(record_property, f"err={worst:.1e} time={elapsed * 1e3:.1f}ms")
    assert worst <= 1e-12
    assert elapsed < 0.1


@criterion(10, "radial data and oversized h0 raise typed errors")
def test_degenerate_handling(record_property, tmp_path):
    with pytest.raises(DegenerateOrbitError):
        mtpi.init((1.0, 0.0, 0.0), (0.5, 0.0, 0.0), 0.1, PhysParams(1, 1))
    with pytest.raises(DegenerateOrbitError):
        build_frame((1.0, 0.0, 0.0), (0.5, 0.0, 0.0), PhysParams(1, 1))
    with pytest.raises(StepTooLargeError):
        mtpi.init(REF_Q0, REF_P0, 6000.0, REF_PARAMS)
    failed = bench.run_comparison([
        bench.Scenario((1, 0, 0), (0.5, 0, 0), 1.0, 1.0, "mtpi", 0.1, n_steps=10, label="radial"),
        bench.Scenario(REF_Q0, REF_P0, 0.5, 3.0, "mtpi", 6000.0, n_steps=10, label="oversized"),
    ])
    kinds = [type(f.error).__name__ for f in failed]
    note(record_property, ", ".join(kinds))
    assert kinds == ["DegenerateOrbitError", "StepTooLargeError"]
    from kepler_mtpi import cli

    assert cli.main(["run", "--step", "6000", "--steps", "3", "--out", str(tmp_path)]) == 3


@criterion(11, "exact CSV round trip and byte-identical outputs of the reference comparison")
def test_output_contracts(record_property, tmp_path):
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        subprocess.run(
            [sys.executable, "-m", "kepler_mtpi", "paper", "--periods", "0.02", "--stride", "20", "--plot",
             "--out", str(out)],
            check=True, capture_output=True,
        )
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    assert any(f.endswith(".svg") for f in files) and any(f.endswith(".csv") for f in files)
    for f in files:
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes(), f
    res = bench.run_scenario(bench.paper_scenarios(periods=0.02, stride=20)[0])
    path = tmp_path / "rt.csv"
    with open(path, "w", newline="") as fh:
        bench.emit_csv(res, fh)
    with open(path) as fh:
        back = bench.read_csv(fh)
    assert back.tobytes() == res.samples.tobytes()
    note(record_property, f"{len(files)} files identical, {len(back)} rows re-parsed exactly")
