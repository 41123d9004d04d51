"""Conservative integrator with a constant angular increment (MTPI).

The scheme carries an auxiliary position ``r_n`` next to the momentum
``p_n`` and an adaptive step ``h_n``. Successive auxiliary positions, and the
physical positions ``q_n`` built from them as angle bisectors, are separated
by the fixed angle ``2*delta``. Angular momentum, energy and the
Laplace-Runge-Lenz vector are conserved up to round-off.

Epochs: ``r_n`` and ``r_{n+1}`` are ``h_n`` apart in time and ``q_n`` lies
between them, so the physical position is dated at the midpoint. The clock
advances by ``(h_n + h_{n+1})/2`` per step, summed with compensation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import kernels
from .core import SINGULAR_RADIUS, PhysParams, Vec3, VecLike
from .errors import DegenerateOrbitError, DomainError, SingularityError, StepCollapseError, StepTooLargeError

# |r0 x P0| below this fraction of |r0| |P0| counts as a radial (L = 0) orbit
RADIAL_TOL = 1e-15


@dataclass(frozen=True, slots=True)
class AngleConstants:
    """``delta`` is half the angular increment between successive positions."""

    cos_delta: float
    cos_2delta: float
    delta: float


@dataclass(frozen=True, slots=True)
class MtpiState:
    r: Vec3
    p: Vec3
    h: float
    n: int
    params: PhysParams
    angles: AngleConstants
    t: float = 0.0
    t_comp: float = 0.0

    @property
    def epoch(self) -> float:
        return self.t + self.t_comp

    def next_aux(self) -> Vec3:
        """The drifted auxiliary position ``r_{n+1} = r_n + h_n p_n / m``."""
        return self.r + self.p * (self.h / self.params.m)

    def position(self) -> Vec3:
        """Physical position ``q_n``: bisector of ``r_n`` and ``r_{n+1}``."""
        r1 = self.next_aux()
        a, b = self.r.norm(), r1.norm()
        return (self.r * b + r1 * a) / (a + b)


@dataclass(frozen=True, slots=True)
class MtpiOutput:
    q: Vec3
    p: Vec3
    t: float
    h_next: float
    n: int


def compute_aux(q: VecLike, p: VecLike, h: float, params: PhysParams) -> tuple[float, Vec3]:
    """Auxiliary variables ``(S_n, r_n)`` recovered from ``(q_n, p_n, h_n)``."""
    q, p = Vec3.of(q), Vec3.of(p)
    qn = q.norm()
    if not qn >= SINGULAR_RADIUS:
        raise SingularityError("initial position is at the force center")
    if not h > 0.0:
        raise DomainError(f"step must be positive, got {h!r}")
    m = params.m
    S = h * q.dot(p) / (m * qn)
    coef = (h / (2.0 * m)) * (S / (qn + math.sqrt(qn * qn + S * S)) - 1.0)
    return S, q + p * coef


def compute_delta(r0: VecLike, p0: VecLike, h0: float, params: PhysParams) -> AngleConstants:
    """Angle constants fixed by the initial data.

    ``cos 2delta`` is the cosine of the angle between ``r_0`` and
    ``r_1 = r_0 + P_0`` with ``P_0 = h0 p0 / m``. The step must satisfy
    ``|P_0| < |r_0|``.
    """
    r0, p0 = Vec3.of(r0), Vec3.of(p0)
    P0 = p0 * (h0 / params.m)
    rn = r0.norm()
    Pn = P0.norm()
    if Pn >= rn:
        raise StepTooLargeError(f"|h0 p0/m| = {Pn:.6g} must be smaller than |r0| = {rn:.6g}; reduce h0")
    cr = r0.cross(P0).norm()
    if Pn == 0.0 or cr <= RADIAL_TOL * rn * Pn:
        raise DegenerateOrbitError("radial or zero momentum: no angular progress per step")
    rP = r0.dot(P0)
    cos_2d = (rn * rn + rP) / (rn * math.sqrt(rn * rn + 2.0 * rP + Pn * Pn))
    # atan2 keeps full relative precision for small angles where acos does not
    delta = 0.5 * math.atan2(cr, rn * rn + rP)
    cos_d = math.sqrt((1.0 + cos_2d) / 2.0)
    return AngleConstants(cos_delta=cos_d, cos_2delta=cos_2d, delta=delta)


def init(q0: VecLike, p0: VecLike, h0: float, params: PhysParams, t0: float = 0.0) -> MtpiState:
    q0, p0 = Vec3.of(q0), Vec3.of(p0)
    if not (h0 > 0.0 and math.isfinite(h0)):
        raise DomainError(f"initial step must be positive and finite, got {h0!r}")
    qn = q0.norm()
    if not qn >= SINGULAR_RADIUS:
        raise SingularityError("initial position is at the force center")
    if q0.cross(p0).norm() <= RADIAL_TOL * qn * p0.norm():
        raise DegenerateOrbitError("angular momentum vanishes (radial orbit)")
    _, r0 = compute_aux(q0, p0, h0, params)
    angles = compute_delta(r0, p0, h0, params)
    return MtpiState(r=r0, p=p0, h=float(h0), n=0, params=params, angles=angles, t=float(t0))


def _raise_for(status: int, n: int) -> None:
    if status == kernels.COLLAPSE:
        raise StepCollapseError("adaptive step denominator collapsed; trajectory too close to the center", step=n)
    raise SingularityError("auxiliary position reached the force center", step=n)


def step(state: MtpiState) -> tuple[MtpiState, MtpiOutput]:
    r, p = state.r, state.p
    a = state.angles
    res = kernels.backend.mtpi_step(
        r.x, r.y, r.z, p.x, p.y, p.z, state.h, state.params.m, state.params.k, a.cos_delta, a.cos_2delta
    )
    if res[0] != kernels.OK:
        _raise_for(res[0], state.n)
    _, r1x, r1y, r1z, p1x, p1y, p1z, h1, qx, qy, qz = res
    t, tc = kernels.pure.two_sum_acc(state.t, state.t_comp, 0.5 * (state.h + h1))
    p1 = Vec3(p1x, p1y, p1z)
    new = replace(state, r=Vec3(r1x, r1y, r1z), p=p1, h=h1, n=state.n + 1, t=t, t_comp=tc)
    return new, MtpiOutput(q=Vec3(qx, qy, qz), p=p1, t=t + tc, h_next=h1, n=state.n + 1)


def propagate(
    q0: VecLike,
    p0: VecLike,
    h0: float,
    params: PhysParams,
    n_steps: int,
    sink: Optional[Callable[[MtpiOutput], object]] = None,
    t0: float = 0.0,
) -> MtpiState:
    """Initialize and take ``n_steps`` steps, handing every output to ``sink``."""
    if n_steps < 1:
        raise DomainError(f"n_steps must be at least 1, got {n_steps}")
    state = init(q0, p0, h0, params, t0)
    for _ in range(n_steps):
        state, out = step(state)
        if sink is not None:
            sink(out)
    return state


def sample_rows(n_steps: int, stride: int) -> int:
    """Rows produced by a run: the initial sample, every stride-th step and the last step."""
    return 1 + n_steps // stride + (1 if n_steps % stride else 0)


def trajectory(
    q0: VecLike,
    p0: VecLike,
    h0: float,
    params: PhysParams,
    n_steps: int,
    stride: int = 1,
    t0: float = 0.0,
) -> tuple[np.ndarray, MtpiState]:
    """Fast propagation through the stepping kernels.

    Returns an ``(rows, 9)`` array with columns ``n, t, qx, qy, qz, px, py, pz, h``
    (row 0 is the initial data) and the final state. Bit-identical to
    repeated :func:`step` calls.
    """
    if n_steps < 0 or stride < 1:
        raise DomainError("n_steps must be >= 0 and stride >= 1")
    q0, p0 = Vec3.of(q0), Vec3.of(p0)
    state = init(q0, p0, h0, params, t0)
    out = np.empty((sample_rows(n_steps, stride), kernels.ROW_WIDTH))
    out[0] = (0.0, float(t0), *q0, *p0, state.h)
    if n_steps == 0:
        return out, state
    rbuf = np.array(state.r.as_tuple())
    pbuf = np.array(state.p.as_tuple())
    clock = np.array([state.h, state.t, state.t_comp])
    a = state.angles
    status, done, rows = kernels.backend.mtpi_propagate(
        rbuf, pbuf, clock, params.m, params.k, a.cos_delta, a.cos_2delta, n_steps, stride, out, 1, 0
    )
    if status != kernels.OK:
        _raise_for(status, done)
    final = replace(
        state,
        r=Vec3(*rbuf.tolist()),
        p=Vec3(*pbuf.tolist()),
        h=float(clock[0]),
        n=n_steps,
        t=float(clock[1]),
        t_comp=float(clock[2]),
    )
    return out, final


def steps_per_period(angles: AngleConstants) -> float:
    """Steps per revolution, ``pi / delta``."""
    return math.pi / angles.delta
