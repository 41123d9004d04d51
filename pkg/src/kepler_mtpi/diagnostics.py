"""Running-supremum error metrics for any integrator's output stream.

Six metrics are tracked against the trajectory's own initial data:

``e_E``     relative energy error
``e_L``     relative error of |L|
``e_dirL``  direction error of L, ``1 - cos`` of the angle to L_0
``e_A``     relative error of |A| (Laplace-Runge-Lenz vector)
``e_dirA``  direction error of A
``e_q``     relative deviation of |q| from the analytic orbit radius at the
            position's signed angle from periapsis

Direction errors are evaluated as ``|u - u_0|^2 / 2`` for unit vectors
``u``, which equals ``1 - cos`` exactly but avoids cancellation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .anomaly import OrbitFrame, build_frame
from .core import PhaseState, PhysParams, Vec3, VecLike
from .errors import DegenerateReferenceError, KeplerError

METRICS = ("e_E", "e_L", "e_dirL", "e_A", "e_dirA", "e_q")
STATE_COLUMNS = ("n", "t", "qx", "qy", "qz", "px", "py", "pz", "h")
COLUMNS = STATE_COLUMNS + METRICS

DEFAULT_SAMPLE_CAP = 2**20


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ax, ay, az = a[:, 0], a[:, 1], a[:, 2]
    bx, by, bz = b[:, 0], b[:, 1], b[:, 2]
    return np.stack((ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx), axis=1)


def _norm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(a[:, 0] * a[:, 0] + a[:, 1] * a[:, 1] + a[:, 2] * a[:, 2])


def integrals_batch(q: np.ndarray, p: np.ndarray, params: PhysParams):
    """Vectorized ``(L, E, A, |q|)`` for arrays of shape (N, 3)."""
    qn = _norm(q)
    L = _cross(q, p)
    E = (p[:, 0] * p[:, 0] + p[:, 1] * p[:, 1] + p[:, 2] * p[:, 2]) / (2.0 * params.m) - params.k / qn
    A = _cross(p, L) / params.m - q * (params.k / qn)[:, None]
    return L, E, A, qn


def _unit(v: np.ndarray, n: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return v / n[:, None]


def _dir_err(u: np.ndarray, u0: np.ndarray) -> np.ndarray:
    d = u - u0
    return 0.5 * (d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])


@dataclass(frozen=True)
class Summary:
    """Final suprema (``None`` for disabled metrics) plus counts."""

    e_E: float | None
    e_L: float | None
    e_dirL: float | None
    e_A: float | None
    e_dirA: float | None
    e_q: float | None
    observations: int
    samples: int

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRICS + ("observations", "samples")}


class ErrorTracker:
    """Accumulates running suprema of the six error metrics.

    The reference (``j = 0``) sample is recorded on construction with all
    errors zero. Metrics whose reference value is zero (``E_0``, ``|L_0|``
    or ``|A_0|``) are disabled: their errors are NaN and asking for them
    raises :class:`DegenerateReferenceError`.

    Recorded samples are capped at ``sample_cap`` rows; when full, every
    other retained sample is dropped and the recording stride doubles.
    Suprema always cover every observation.
    """

    def __init__(self, q0: VecLike, p0: VecLike, params: PhysParams, t0: float = 0.0,
                 h0: float = float("nan"), sample_cap: int = DEFAULT_SAMPLE_CAP):
        q0, p0 = Vec3.of(q0), Vec3.of(p0)
        self.params = params
        self.reference = PhaseState(q0, p0, t0)
        self.frame: OrbitFrame = build_frame(q0, p0, params)
        L, E, A, _ = integrals_batch(np.array([q0.as_tuple()]), np.array([p0.as_tuple()]), params)
        self._E0 = float(E[0])
        self._L0 = L[0]
        self._A0 = A[0]
        self._Ln0 = float(_norm(L)[0])
        self._An0 = float(_norm(A)[0])
        self._Lhat0 = self._L0 / self._Ln0
        self._Ahat0 = self._A0 / self._An0 if self._An0 > 0.0 else np.full(3, np.nan)
        self.disabled = frozenset(
            name
            for name, ref in (("e_E", self._E0), ("e_L", self._Ln0), ("e_dirL", self._Ln0),
                              ("e_A", self._An0), ("e_dirA", self._An0))
            if ref == 0.0
        )
        self.sample_cap = max(2, int(sample_cap))
        self.record_stride = 1
        self.observations = 0
        self._sup = np.zeros(len(METRICS))
        for i, name in enumerate(METRICS):
            if name in self.disabled:
                self._sup[i] = np.nan
        self._chunks: list[np.ndarray] = []
        self._obs_index: list[np.ndarray] = []
        self._n_recorded = 0
        first = np.array([[0.0, t0, *q0, *p0, h0]])
        errs = np.where([m in self.disabled for m in METRICS], np.nan, 0.0)[None, :]
        self._record(np.hstack((first, errs)), np.array([0]))
        self.observations = 1

    def errors(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        """Instantaneous errors, shape (N, 6), for position/momentum arrays of shape (N, 3)."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        p = np.atleast_2d(np.asarray(p, dtype=float))
        L, E, A, qn = integrals_batch(q, p, self.params)
        Ln, An = _norm(L), _norm(A)
        out = np.empty((q.shape[0], len(METRICS)))
        with np.errstate(invalid="ignore", divide="ignore"):
            out[:, 0] = np.abs((E - self._E0) / self._E0)
            out[:, 1] = np.abs((Ln - self._Ln0) / self._Ln0)
            out[:, 2] = _dir_err(_unit(L, Ln), self._Lhat0[None, :])
            out[:, 3] = np.abs((An - self._An0) / self._An0)
            out[:, 4] = _dir_err(_unit(A, An), self._Ahat0[None, :])
            f = self.frame
            x = q @ np.array(f.a_hat.as_tuple())
            y = q @ np.array(f.b_hat.as_tuple())
            rho = np.hypot(x, y)
            # 1 + cos(nu) without cancellation on the apoapsis side
            opc = np.where(x >= 0.0, (rho + x) / rho, y * y / (rho * (rho - x)))
            den = f.one_minus_e2 / (1.0 + f.e) + f.e * opc
            rad = np.where(den > 0.0, f.semi_latus / np.where(den > 0.0, den, 1.0), np.inf)
            out[:, 5] = np.abs(rad - qn) / rad
        for i, name in enumerate(METRICS):
            if name in self.disabled:
                out[:, i] = np.nan
        return out

    def observe(self, state: PhaseState, n: int | None = None, h: float = float("nan")) -> ErrorTracker:
        """Observe one state; returns the tracker for chaining."""
        n = self.observations if n is None else n
        row = np.array([[n, state.t, *state.q, *state.p, h]])
        return self.observe_rows(row)

    def observe_rows(self, rows: np.ndarray) -> ErrorTracker:
        """Observe a batch of rows laid out as ``n, t, qx, qy, qz, px, py, pz, h``."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[0] == 0:
            return self
        errs = self.errors(rows[:, 2:5], rows[:, 5:8])
        self._sup = np.maximum(self._sup, np.max(errs, axis=0))
        idx = np.arange(self.observations, self.observations + rows.shape[0])
        self.observations += rows.shape[0]
        keep = idx % self.record_stride == 0
        self._record(np.hstack((rows, errs))[keep], idx[keep])
        return self

    def _record(self, full: np.ndarray, idx: np.ndarray) -> None:
        self._chunks.append(full)
        self._obs_index.append(idx)
        self._n_recorded += full.shape[0]
        while self._n_recorded > self.sample_cap:
            data = np.concatenate(self._chunks)
            index = np.concatenate(self._obs_index)
            self.record_stride *= 2
            keep = index % self.record_stride == 0
            self._chunks = [data[keep]]
            self._obs_index = [index[keep]]
            self._n_recorded = int(keep.sum())

    def samples(self) -> np.ndarray:
        """Recorded samples, shape (N, 15), columns :data:`COLUMNS`."""
        if len(self._chunks) > 1:
            self._chunks = [np.concatenate(self._chunks)]
            self._obs_index = [np.concatenate(self._obs_index)]
        return self._chunks[0]

    def sup(self, metric: str) -> float:
        if metric not in METRICS:
            raise KeyError(metric)
        if metric in self.disabled:
            raise DegenerateReferenceError(f"{metric} is disabled: its reference value is zero")
        return float(self._sup[METRICS.index(metric)])

    def summarize(self) -> Summary:
        if self.observations == 0:
            raise KeplerError("no observations recorded")
        vals = [None if m in self.disabled else float(v) for m, v in zip(METRICS, self._sup)]
        return Summary(*vals, observations=self.observations, samples=self._n_recorded)
