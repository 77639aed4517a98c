"""Closed-form conformal curvatures of a world-line with given phase data.

Phase parameters ``e1 < 0 < e2 < e3`` are the roots of the cubic
``Q1(t) = t^3 + 2 c1 t^2 + c2 t + c3^2`` built from the conserved
characters.  The middle curvature is the periodic elliptic expression

    k2(u) = sqrt((l1 - l2 sn^2(sqrt(l3) u, m)) / (l3 - l4 sn^2(sqrt(l3) u, m)))

with snapshot l1 = e2 l3, l2 = e1 l4, l3 = e3 - e1, l4 = e3 - e2,
m = l4/l3, and the other two follow algebraically:
k1 = (3/2) k2^2 + c1 and k3 = c3 / k2^2.  The canonical parametrization
fixes the phase so that k2(0) = sqrt(e2) is the minimum.
"""

from dataclasses import dataclass

import numpy as np

from . import elliptic as el
from .errors import InvalidPhaseParams

__all__ = [
    "PhaseParams",
    "EllipticData",
    "derive_elliptic_data",
    "k2",
    "k2_dot",
    "k2_ddot",
    "k1",
    "k3",
    "k1_dot",
    "k3_dot",
    "verify_world_line_odes",
    "OdeResiduals",
]


@dataclass(frozen=True)
class PhaseParams:
    """Ordered triple e1 < 0 < e2 < e3 selecting a world-line class."""
    e1: float
    e2: float
    e3: float

    def __post_init__(self):
        if not (self.e1 < 0.0 < self.e2 < self.e3):
            raise InvalidPhaseParams(
                f"phase parameters must satisfy e1 < 0 < e2 < e3, "
                f"got ({self.e1}, {self.e2}, {self.e3})")

    def as_tuple(self):
        return (self.e1, self.e2, self.e3)


@dataclass(frozen=True)
class EllipticData:
    """Derived constants of a world-line class.

    Carries the elliptic snapshot (l1..l4, parameter m, period omega), the
    characters (c1, c2, c3 with c3 > 0 by the positive-helicity convention)
    and the cached complete integrals.
    """
    e: PhaseParams
    l1: float
    l2: float
    l3: float
    l4: float
    m: float
    omega: float
    c1: float
    c2: float
    c3: float
    K: float
    E: float

    @property
    def sqrt_l3(self) -> float:
        return float(np.sqrt(self.l3))

    def q1_poly(self):
        """Coefficients of Q1(t) = t^3 + 2 c1 t^2 + c2 t + c3^2."""
        return np.array([1.0, 2.0 * self.c1, self.c2, self.c3 ** 2])


def derive_elliptic_data(e: PhaseParams) -> EllipticData:
    """All derived constants of the phase triple."""
    e1, e2, e3 = e.as_tuple()
    l3 = e3 - e1
    l4 = e3 - e2
    l1 = e2 * l3
    l2 = e1 * l4
    m = l4 / l3
    K = el.complete_K(m)
    E = el.complete_E(m)
    omega = 2.0 * K / np.sqrt(l3)
    c1 = -0.5 * (e1 + e2 + e3)
    c2 = e1 * e2 + e1 * e3 + e2 * e3
    c3 = float(np.sqrt(-e1 * e2 * e3))
    return EllipticData(e, l1, l2, l3, l4, m, float(omega), c1, c2, c3, K, E)


def _sn2_terms(u, d: EllipticData):
    """sn, cn, dn at the scaled argument plus numerator and denominator of k2^2."""
    v = d.sqrt_l3 * np.asarray(u, dtype=float)
    sn, cn, dn, _ = el.jacobi(v, d.m)
    sn2 = np.square(sn)
    num = d.l1 - d.l2 * sn2
    den = d.l3 - d.l4 * sn2
    return sn, cn, dn, num, den


def k2(u, d: EllipticData):
    """Middle conformal curvature; even, periodic with period omega."""
    _, _, _, num, den = _sn2_terms(u, d)
    return np.sqrt(num / den)


def k2_dot(u, d: EllipticData):
    """First derivative of k2, analytic chain rule through sn."""
    sn, cn, dn, num, den = _sn2_terms(u, d)
    # d(k2^2)/du = l3 l4 (e2 - e1) * 2 sqrt(l3) sn cn dn / den^2
    dk2sq = 2.0 * d.l3 * d.l4 * (d.e.e2 - d.e.e1) * d.sqrt_l3 * sn * cn * dn / den ** 2
    return dk2sq / (2.0 * np.sqrt(num / den))


def k2_ddot(u, d: EllipticData):
    """Second derivative of k2.

    Uses the form obtained by differentiating the first-order invariant
    k2_dot^2 + k2^4 + c3^2 k2^-2 + 2 c1 k2^2 + c2 = 0, namely
    -2 k2^3 + c3^2 k2^-3 - 2 c1 k2, which agrees with
    k2 (k3^2 + k2^2 - 2 k1).
    """
    v = k2(u, d)
    return -2.0 * v ** 3 + d.c3 ** 2 / v ** 3 - 2.0 * d.c1 * v


def curvature_state(u: float, d: EllipticData):
    """Scalar one-pass evaluation of (k1, k2, k3, k2_dot) at u.

    Single Jacobi call; meant for ODE right-hand sides.
    """
    sn, cn, dn, _ = el.jacobi_scalar(d.sqrt_l3 * float(u), d.m)
    sn2 = sn * sn
    num = d.l1 - d.l2 * sn2
    den = d.l3 - d.l4 * sn2
    v2sq = num / den
    v2 = np.sqrt(v2sq)
    dk2sq = 2.0 * d.l3 * d.l4 * (d.e.e2 - d.e.e1) * d.sqrt_l3 * sn * cn * dn / den ** 2
    return (1.5 * v2sq + d.c1, v2, d.c3 / v2sq, dk2sq / (2.0 * v2))


def k1(u, d: EllipticData):
    """First conformal curvature k1 = (3/2) k2^2 + c1."""
    return 1.5 * np.square(k2(u, d)) + d.c1


def k3(u, d: EllipticData):
    """Third conformal curvature k3 = c3 / k2^2 > 0."""
    return d.c3 / np.square(k2(u, d))


def k1_dot(u, d: EllipticData):
    return 3.0 * k2(u, d) * k2_dot(u, d)


def k3_dot(u, d: EllipticData):
    return -2.0 * d.c3 * k2_dot(u, d) / k2(u, d) ** 3


@dataclass(frozen=True)
class OdeResiduals:
    """Max-norm residuals of the variational system on a grid."""
    first_order: float      # k2_dot^2 + k2^4 + c3^2 k2^-2 + 2 c1 k2^2 + c2
    phase_cubic: float      # (k2 k2_dot)^2 + (k2^2-e1)(k2^2-e2)(k2^2-e3)
    second_order: float     # k2_ddot - k2 (k3^2 + k2^2 - 2 k1)
    helicity: float         # k2 k3_dot + 2 k3 k2_dot
    momentum_trace: float   # k1_dot - 3 k2 k2_dot

    def max(self) -> float:
        return max(self.first_order, self.phase_cubic, self.second_order,
                   self.helicity, self.momentum_trace)


def verify_world_line_odes(d: EllipticData, grid) -> OdeResiduals:
    """Evaluate every residual of the closed-form curvature system."""
    u = np.asarray(grid, dtype=float)
    v2 = k2(u, d)
    v2d = k2_dot(u, d)
    v2dd = k2_ddot(u, d)
    v1 = 1.5 * v2 ** 2 + d.c1
    v3 = d.c3 / v2 ** 2
    v1d = k1_dot(u, d)
    v3d = k3_dot(u, d)
    e1, e2, e3 = d.e.as_tuple()
    r1 = np.abs(v2d ** 2 + v2 ** 4 + d.c3 ** 2 / v2 ** 2 + 2.0 * d.c1 * v2 ** 2 + d.c2).max()
    r2 = np.abs((v2 * v2d) ** 2 + (v2 ** 2 - e1) * (v2 ** 2 - e2) * (v2 ** 2 - e3)).max()
    r3 = np.abs(v2dd - v2 * (v3 ** 2 + v2 ** 2 - 2.0 * v1)).max()
    r4 = np.abs(v2 * v3d + 2.0 * v3 * v2d).max()
    r5 = np.abs(v1d - 3.0 * v2 * v2d).max()
    return OdeResiduals(float(r1), float(r2), float(r3), float(r4), float(r5))
