"""Anomalies, the Kepler equation and epochs for elliptic orbits.

Angles are signed, measured in the orbital plane from the periapsis
direction, and kept unwrapped: true, eccentric and mean anomaly share one
winding number so that the mean anomaly stays linear in time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import FirstIntegrals, PhaseState, PhysParams, Vec3, VecLike, eccentricity
from .errors import ConvergenceError, DegenerateOrbitError, DomainError

TWO_PI = 2.0 * math.pi
_EPS = 2.220446049250313e-16


@dataclass(frozen=True, slots=True)
class OrbitFrame:
    """Orthonormal orbit frame: periapsis direction, in-plane normal to it, orbit normal."""

    a_hat: Vec3
    b_hat: Vec3
    l_hat: Vec3
    e: float
    integrals: FirstIntegrals
    params: PhysParams

    @property
    def semi_latus(self) -> float:
        """``L^2 / (k m)``, the radius at true anomaly pi/2."""
        L = self.integrals.L
        return L.dot(L) / (self.params.k * self.params.m)

    @property
    def one_minus_e2(self) -> float:
        """``1 - e^2`` from the integrals, free of the cancellation in ``1 - e*e``."""
        L = self.integrals.L
        return -2.0 * self.integrals.E * L.dot(L) / (self.params.m * self.params.k**2)

    def conic_factor(self, one_plus_cos: float) -> float:
        """``1 + e cos(nu)`` written as ``(1 - e^2)/(1 + e) + e (1 + cos(nu))``."""
        return self.one_minus_e2 / (1.0 + self.e) + self.e * one_plus_cos

    @property
    def mean_motion(self) -> float:
        E = self.integrals.E
        if not E < 0.0:
            raise DomainError("mean motion is defined for bound (E < 0) orbits only")
        return 2.0 * math.sqrt(2.0) * abs(E) ** 1.5 / (self.params.k * math.sqrt(self.params.m))

    @property
    def period(self) -> float:
        return TWO_PI / self.mean_motion


def build_frame(q0: VecLike, p0: VecLike, params: PhysParams) -> OrbitFrame:
    """Frame from initial data.

    For (numerically) circular orbits the LRL vector vanishes and the
    periapsis direction is taken along ``q0``, so the initial anomaly is 0.
    """
    state = PhaseState.of(q0, p0)
    ints = FirstIntegrals.from_state(state, params)
    Ln = ints.L.norm()
    if Ln == 0.0:
        raise DegenerateOrbitError("angular momentum vanishes (radial orbit)")
    l_hat = ints.L / Ln
    A = ints.A
    if A.norm() > 1e-12 * params.k:
        a = A - l_hat * A.dot(l_hat)
    else:
        a = state.q - l_hat * state.q.dot(l_hat)
    a_hat = a.unit()
    b_hat = l_hat.cross(a_hat)
    return OrbitFrame(a_hat, b_hat, l_hat, eccentricity(ints, params), ints, params)


def signed_true_anomaly(frame: OrbitFrame, q: VecLike) -> float:
    """Angle of ``q`` from periapsis in (-pi, pi], positive along the motion."""
    q = Vec3.of(q)
    return math.atan2(q.dot(frame.b_hat), q.dot(frame.a_hat))


def true_anomaly_at_step(frame: OrbitFrame, nu0: float, n: int, delta: float) -> float:
    """Unwrapped true anomaly of the n-th MTPI position."""
    if not delta > 0.0:
        raise DomainError("delta must be positive")
    return 2.0 * n * delta + nu0


def _check_elliptic(e: float) -> None:
    if not 0.0 <= e < 1.0:
        raise DomainError(f"eccentricity must lie in [0, 1), got {e!r}")


def _winding(angle: float) -> int:
    """Number of whole turns, with (-pi, pi] as the principal branch."""
    return math.ceil((angle - math.pi) / TWO_PI)


def true_to_eccentric(nu: float, e: float) -> float:
    """Eccentric anomaly with the same winding as ``nu``; strictly increasing in ``nu``."""
    _check_elliptic(e)
    w = _winding(nu)
    half = 0.5 * (nu - TWO_PI * w)
    u = 2.0 * math.atan2(math.sqrt(1.0 - e) * math.sin(half), math.sqrt(1.0 + e) * math.cos(half))
    return u + TWO_PI * w


def eccentric_to_true(u: float, e: float) -> float:
    _check_elliptic(e)
    w = _winding(u)
    half = 0.5 * (u - TWO_PI * w)
    nu = 2.0 * math.atan2(math.sqrt(1.0 + e) * math.sin(half), math.sqrt(1.0 - e) * math.cos(half))
    return nu + TWO_PI * w


def kepler_M(u: float, e: float) -> float:
    """Mean anomaly from eccentric anomaly."""
    return u - e * math.sin(u)


def solve_kepler(M: float, e: float, tol: float = 1e-15) -> float:
    """Invert the Kepler equation ``M = u - e sin u``.

    Converges when the residual is at most ``tol * max(1, |M|)``. Newton
    iteration from ``M + 0.85 e sign(sin M)``; bisection on ``[M - e, M + e]``
    if Newton has not converged after 50 iterations.
    """
    _check_elliptic(e)
    if not tol >= 1e-15:
        raise DomainError("tol must be at least 1e-15")
    if e == 0.0:
        return M
    w = math.floor(M / TWO_PI)
    Mr = M - TWO_PI * w
    lim = tol * max(1.0, abs(Mr))
    u = Mr + 0.85 * e * math.copysign(1.0, math.sin(Mr)) if math.sin(Mr) != 0.0 else Mr
    for _ in range(50):
        f = u - e * math.sin(u) - Mr
        if abs(f) <= lim:
            return u + TWO_PI * w
        du = f / (1.0 - e * math.cos(u))
        u -= du
        if du == 0.0:
            break
    lo, hi = Mr - e, Mr + e
    best, best_f = u, abs(u - e * math.sin(u) - Mr)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = mid - e * math.sin(mid) - Mr
        if abs(f) < best_f:
            best, best_f = mid, abs(f)
        if abs(f) <= lim or mid in (lo, hi):
            break
        if f < 0.0:
            lo = mid
        else:
            hi = mid
    # residual floor of double arithmetic near u ~ M
    if best_f <= max(lim, 4.0 * _EPS * max(1.0, abs(best))):
        return best + TWO_PI * w
    raise ConvergenceError(f"Kepler equation did not converge for M={M!r}, e={e!r}")


def epoch_from_anomaly(frame: OrbitFrame, nu: float, t0: float, nu0: float) -> float:
    """Epoch at unwrapped true anomaly ``nu`` given the epoch ``t0`` at ``nu0``."""
    if not (frame.integrals.E < 0.0 and frame.e < 1.0):
        raise DomainError("epochs are implemented for elliptic orbits (E < 0) only")
    e = frame.e
    M = kepler_M(true_to_eccentric(nu, e), e)
    M0 = kepler_M(true_to_eccentric(nu0, e), e)
    return t0 + (M - M0) / frame.mean_motion


def orbit_radius(frame: OrbitFrame, angle: float) -> float:
    """Conic radius at angle ``angle`` from periapsis (``theta + nu0`` in the orbit equation)."""
    den = frame.conic_factor(2.0 * math.cos(0.5 * angle) ** 2)
    if not den > 0.0:
        raise DomainError(f"orbit is unbounded at angle {angle!r} (1 + e cos = {den!r})")
    return frame.semi_latus / den
