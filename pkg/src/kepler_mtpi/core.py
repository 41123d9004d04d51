"""Physical model of the Kepler problem.

Motion of a body of mass ``m`` under the attractive central force
``-k q / |q|^3``. Vectors are small immutable value types; every function is
pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .errors import DomainError, SingularityError

#: Below this radius the position is treated as a collision with the center;
#: it also keeps r**3 a normal double.
SINGULAR_RADIUS = 1e-100

#: Radicand values of the eccentricity formula in [-ECC_CLAMP, 0) are rounded to 0.
ECC_CLAMP = 1e-9


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float
    y: float
    z: float

    @classmethod
    def of(cls, v: VecLike) -> Vec3:
        if isinstance(v, Vec3):
            return v
        x, y, z = v
        return cls(float(x), float(y), float(z))

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y
        yield self.z

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> Vec3:
        return Vec3(s * self.x, s * self.y, s * self.z)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> Vec3:
        return Vec3(self.x / s, self.y / s, self.z / s)

    def __neg__(self) -> Vec3:
        return Vec3(-self.x, -self.y, -self.z)

    def dot(self, other: Vec3) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: Vec3) -> Vec3:
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.hypot(self.x, self.y, self.z)

    def unit(self) -> Vec3:
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return self / n

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


VecLike = Union[Vec3, Iterable[float]]

ZERO = Vec3(0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True)
class PhysParams:
    """Mass ``m`` and force constant ``k`` of the Kepler system."""

    m: float
    k: float

    def __post_init__(self):
        if not (self.m > 0.0 and math.isfinite(self.m)):
            raise DomainError(f"mass must be positive and finite, got {self.m!r}")
        if not (self.k > 0.0 and math.isfinite(self.k)):
            raise DomainError(f"force constant must be positive and finite, got {self.k!r}")


@dataclass(frozen=True, slots=True)
class PhaseState:
    q: Vec3
    p: Vec3
    t: float = 0.0

    @classmethod
    def of(cls, q: VecLike, p: VecLike, t: float = 0.0) -> PhaseState:
        return cls(Vec3.of(q), Vec3.of(p), float(t))


@dataclass(frozen=True, slots=True)
class FirstIntegrals:
    """Angular momentum ``L``, energy ``E`` and Laplace-Runge-Lenz vector ``A``."""

    L: Vec3
    E: float
    A: Vec3

    @classmethod
    def from_state(cls, state: PhaseState, params: PhysParams) -> FirstIntegrals:
        return cls(angular_momentum(state), energy(state, params), lrl_vector(state, params))


def _radius(q: Vec3, eps: float = SINGULAR_RADIUS) -> float:
    r = q.norm()
    if not r >= eps:
        raise SingularityError(f"position {q.as_tuple()} is at the force center")
    return r


def kepler_rhs(state: PhaseState, params: PhysParams, eps: float = SINGULAR_RADIUS) -> tuple[Vec3, Vec3]:
    """Time derivatives ``(dq/dt, dp/dt) = (p/m, -k q/|q|^3)``."""
    r = _radius(state.q, eps)
    c = params.k / (r * r * r)
    return state.p / params.m, state.q * -c


def angular_momentum(state: PhaseState) -> Vec3:
    return state.q.cross(state.p)


def energy(state: PhaseState, params: PhysParams, eps: float = SINGULAR_RADIUS) -> float:
    r = _radius(state.q, eps)
    return state.p.dot(state.p) / (2.0 * params.m) - params.k / r


def lrl_vector(state: PhaseState, params: PhysParams, eps: float = SINGULAR_RADIUS) -> Vec3:
    """Laplace-Runge-Lenz vector ``p x L / m - k q/|q|``; points to periapsis, norm ``k e``."""
    r = _radius(state.q, eps)
    L = angular_momentum(state)
    return state.p.cross(L) / params.m - state.q * (params.k / r)


def eccentricity(integrals: FirstIntegrals, params: PhysParams) -> float:
    """Eccentricity from energy and angular momentum.

    Tiny negative radicands produced by round-off near circular orbits are
    clamped to zero; anything below ``-ECC_CLAMP`` means the integrals are
    inconsistent and raises :class:`DomainError`.
    """
    L2 = integrals.L.dot(integrals.L)
    rad = 1.0 + 2.0 * integrals.E * L2 / (params.m * params.k * params.k)
    if rad < -ECC_CLAMP:
        raise DomainError(f"eccentricity radicand {rad!r} is negative; integrals are inconsistent")
    return math.sqrt(max(0.0, rad))
