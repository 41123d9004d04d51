"""Fixed-step reference integrators: RK4, leapfrog and a 4th-order composition."""
from __future__ import annotations

import enum
import math

import numpy as np

from . import kernels
from .core import PhaseState, PhysParams, Vec3, VecLike
from .errors import ConvergenceError, DomainError, SingularityError

# Yoshida triple jump
W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
W0 = 1.0 - 2.0 * W1

#: oracle_state_at gives up beyond this many steps per unit time
ORACLE_MAX_STEPS_PER_TIME = 2**20


class FixedStepMethod(enum.Enum):
    RK4 = "rk4"
    LEAPFROG = "leapfrog"
    COMPOSITION4 = "composition4"

    @property
    def code(self) -> int:
        return _CODES[self]


_CODES = {
    FixedStepMethod.RK4: kernels.METHOD_RK4,
    FixedStepMethod.LEAPFROG: kernels.METHOD_LEAPFROG,
    FixedStepMethod.COMPOSITION4: kernels.METHOD_COMPOSITION4,
}


def _finish(res, state: PhaseState, dt: float) -> PhaseState:
    if res[0] != kernels.OK:
        raise SingularityError("stage position reached the force center")
    return PhaseState(Vec3(res[1], res[2], res[3]), Vec3(res[4], res[5], res[6]), state.t + dt)


def rk4_step(state: PhaseState, params: PhysParams, dt: float) -> PhaseState:
    q, p = state.q, state.p
    res = kernels.backend.rk4_step(q.x, q.y, q.z, p.x, p.y, p.z, dt, params.m, params.k)
    return _finish(res, state, dt)


def leapfrog_step(state: PhaseState, params: PhysParams, dt: float) -> PhaseState:
    """Kick-drift-kick; time reversible and symplectic."""
    q, p = state.q, state.p
    res = kernels.backend.leapfrog_step(q.x, q.y, q.z, p.x, p.y, p.z, dt, params.m, params.k)
    return _finish(res, state, dt)


def composition4_step(state: PhaseState, params: PhysParams, dt: float) -> PhaseState:
    """Three leapfrog substeps of ``W1 dt, W0 dt, W1 dt``."""
    q, p = state.q, state.p
    res = kernels.backend.composition4_step(q.x, q.y, q.z, p.x, p.y, p.z, dt, params.m, params.k, W0, W1)
    return _finish(res, state, dt)


STEP_FUNCTIONS = {
    FixedStepMethod.RK4: rk4_step,
    FixedStepMethod.LEAPFROG: leapfrog_step,
    FixedStepMethod.COMPOSITION4: composition4_step,
}


def trajectory(
    method: FixedStepMethod | str,
    q0: VecLike,
    p0: VecLike,
    params: PhysParams,
    dt: float,
    n_steps: int,
    stride: int = 1,
    t0: float = 0.0,
) -> np.ndarray:
    """Run a fixed-step method through the kernels.

    Returns rows ``n, t, qx, qy, qz, px, py, pz, h`` like
    :func:`kepler_mtpi.mtpi.trajectory`; the epoch of step ``n`` is ``t0 + n*dt``.
    """
    from .mtpi import sample_rows

    method = FixedStepMethod(method)
    if n_steps < 0 or stride < 1:
        raise DomainError("n_steps must be >= 0 and stride >= 1")
    q0, p0 = Vec3.of(q0), Vec3.of(p0)
    if not q0.norm() > 0.0:
        raise SingularityError("initial position is at the force center")
    out = np.empty((sample_rows(n_steps, stride), kernels.ROW_WIDTH))
    out[0] = (0.0, float(t0), *q0, *p0, dt)
    if n_steps == 0:
        return out
    qbuf = np.array(q0.as_tuple())
    pbuf = np.array(p0.as_tuple())
    status, done, _ = kernels.backend.fixed_propagate(
        method.code, qbuf, pbuf, float(t0), float(dt), params.m, params.k, W0, W1, n_steps, stride, out, 1, 0
    )
    if status != kernels.OK:
        raise SingularityError("stage position reached the force center", step=done)
    return out


def _rk4_final(q0: Vec3, p0: Vec3, params: PhysParams, dt: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    qbuf = np.array(q0.as_tuple())
    pbuf = np.array(p0.as_tuple())
    out = np.empty((1, kernels.ROW_WIDTH))
    status, done, _ = kernels.backend.fixed_propagate(
        kernels.METHOD_RK4, qbuf, pbuf, 0.0, dt, params.m, params.k, W0, W1, n, n, out, 0, 0
    )
    if status != kernels.OK:
        raise SingularityError("oracle stage reached the force center", step=done)
    return qbuf, pbuf


def oracle_state_at(
    q0: VecLike, p0: VecLike, params: PhysParams, t_target: float, rel_tol: float = 1e-10
) -> PhaseState:
    """Reference state at ``t_target`` from RK4 with automatic step halving.

    Runs with ``n`` and ``2n`` steps until positions and momenta agree to
    ``rel_tol``; the finer run is returned.
    """
    if not 1e-12 <= rel_tol <= 1e-4:
        raise DomainError(f"rel_tol must lie in [1e-12, 1e-4], got {rel_tol!r}")
    q0, p0 = Vec3.of(q0), Vec3.of(p0)
    if t_target == 0.0:
        return PhaseState(q0, p0, 0.0)
    span = abs(t_target)
    cap = ORACLE_MAX_STEPS_PER_TIME * max(1.0, span)
    n = max(64, math.ceil(16 * span))
    qc, pc = _rk4_final(q0, p0, params, t_target / n, n)
    while True:
        n *= 2
        if n > cap:
            raise ConvergenceError(f"RK4 oracle did not reach rel_tol={rel_tol:g} within {int(cap)} steps")
        qf, pf = _rk4_final(q0, p0, params, t_target / n, n)
        dq = np.linalg.norm(qf - qc) / np.linalg.norm(qf)
        pn = np.linalg.norm(pf)
        dp = np.linalg.norm(pf - pc) / pn if pn > 0.0 else np.linalg.norm(pf - pc)
        if dq <= rel_tol and dp <= rel_tol:
            return PhaseState(Vec3(*qf.tolist()), Vec3(*pf.tolist()), float(t_target))
        qc, pc = qf, pf
