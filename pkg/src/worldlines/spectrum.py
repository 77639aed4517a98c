"""Spectral data of the conserved momentum: characteristic polynomial,
root classification, eigenvalue branches, closed-form eigenvector maps and
their singular sets.

The characteristic polynomial of the momentum is

    P(t) = t^6 + 2 c1 t^4 + (c2 + 1) t^2 + c3^2,

so the squared eigenvalues are the roots of the cubic

    Q2(s) = Q1(s) + s = s^3 + 2 c1 s^2 + (c2 + 1) s + c3^2.

Three cases occur: three distinct real roots with
e1 < rho1 < 0 < e2 < rho2 < rho3 < e3, one negative real root plus a
complex-conjugate pair, or a simple negative root plus a real double root
in (e2, e3).  Eigenvalues come in +/- pairs with the purely imaginary pair
listed first.
"""

from dataclasses import dataclass

import numpy as np

from . import curvature as cv
from . import elliptic as el
from . import frames as fr
from .config import DEFAULTS
from .errors import AlphaOutOfRange, DegenerateSpectrum

__all__ = [
    "solve_q2_cubic",
    "q2_discriminant",
    "SpectralData",
    "characteristic_data",
    "eigenvector_map",
    "generalized_eigenvector_map",
    "SingularSets",
    "singular_sets",
]


def q2_poly(d: cv.EllipticData) -> np.ndarray:
    """Coefficients of Q2(s) = s^3 + 2 c1 s^2 + (c2 + 1) s + c3^2."""
    return np.array([1.0, 2.0 * d.c1, d.c2 + 1.0, d.c3 ** 2])


def q2_discriminant(d: cv.EllipticData) -> float:
    """Discriminant of the depressed form of Q2; positive iff 3 real roots."""
    _, b, c, dd = q2_poly(d)
    p = c - b ** 2 / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + dd
    return -4.0 * p ** 3 - 27.0 * q ** 2


def solve_q2_cubic(d: cv.EllipticData, disc_rel: float = DEFAULTS.disc_rel):
    """Roots of Q2 by the trigonometric/Cardano method.

    Returns (roots, kind) with kind one of "real", "complex", "double".
    The double branch triggers when |discriminant| falls below ``disc_rel``
    times its natural scale 4|p|^3 + 27 q^2.
    """
    _, b, c, dd = q2_poly(d)
    p = c - b ** 2 / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + dd
    disc = -4.0 * p ** 3 - 27.0 * q ** 2
    scale = 4.0 * abs(p) ** 3 + 27.0 * q ** 2
    shift = -b / 3.0

    if abs(disc) <= disc_rel * scale:
        if p == 0.0:
            raise DegenerateSpectrum("triple root is outside the phase domain")
        s_double = -3.0 * q / (2.0 * p)
        s_simple = 3.0 * q / p
        return (np.array([s_simple + shift, s_double + shift, s_double + shift],
                         dtype=complex), "double")
    if disc > 0.0:
        # three distinct real roots, Viete's trigonometric form
        r = 2.0 * np.sqrt(-p / 3.0)
        theta = np.arccos(np.clip(3.0 * q / (2.0 * p) * np.sqrt(-3.0 / p), -1.0, 1.0))
        roots = r * np.cos((theta - 2.0 * np.pi * np.arange(3)) / 3.0) + shift
        return np.sort(roots).astype(complex), "real"
    # one real root (Cardano, cancellation-safe form) and a conjugate pair
    rad = np.sqrt(q ** 2 / 4.0 + p ** 3 / 27.0)
    big = -q / 2.0 - rad if q >= 0 else -q / 2.0 + rad
    a3 = np.cbrt(big)
    s1 = a3 + (-p / 3.0) / a3 if a3 != 0.0 else 0.0
    # deflate: s^2 + s1 s + (p + s1^2)
    disc_q = s1 ** 2 - 4.0 * (p + s1 ** 2)
    sq = np.sqrt(complex(disc_q))
    r2 = (-s1 + sq) / 2.0 + shift
    r3 = (-s1 - sq) / 2.0 + shift
    if r2.imag < 0:
        r2, r3 = r3, r2
    return np.array([s1 + shift, r2, r3], dtype=complex), "complex"


@dataclass(frozen=True)
class SpectralData:
    """Roots of Q2 and the assigned momentum eigenvalues.

    ``kind`` is "regular-real", "regular-complex" or "exceptional";
    ``lambdas`` holds (value, multiplicity) in the canonical order
    lambda0 = i sqrt(|rho1|), lambda1 = -lambda0, then the +/- pairs of
    the other two roots (exceptional: four values, the real ones double).
    """
    rho: np.ndarray
    kind: str
    lambdas: tuple

    @property
    def is_exceptional(self) -> bool:
        return self.kind == "exceptional"

    def eigenvalues(self) -> np.ndarray:
        return np.array([lam for lam, _ in self.lambdas])

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "rho": [[z.real, z.imag] for z in self.rho],
            "lambdas": [[lam.real, lam.imag, mult] for lam, mult in self.lambdas],
        }


def characteristic_data(d: cv.EllipticData,
                        disc_rel: float = DEFAULTS.disc_rel) -> SpectralData:
    """Classify the momentum spectrum of the world-line class ``d``.

    The double-root branch is accepted only if the generalized-eigenvector
    equation (H(0) - lambda) x = L(0) is solvable within the configured
    Fredholm residual; otherwise the spectrum is reported degenerate.
    """
    rho, croots = solve_q2_cubic(d, disc_rel)
    e1, _, e3 = d.e.as_tuple()

    if croots == "real":
        r = np.sort(rho.real)
        rho = r.astype(complex)
        lam2 = np.sqrt(r[1])
        lam4 = np.sqrt(r[2])
        lambdas = ((1j * np.sqrt(-r[0]), 1), (-1j * np.sqrt(-r[0]), 1),
                   (complex(lam2), 1), (complex(-lam2), 1),
                   (complex(lam4), 1), (complex(-lam4), 1))
        kind = "regular-real"
    elif croots == "complex":
        r1 = rho[0].real
        lam2 = complex(el.sqrt_upper_half(rho[1]))
        lam4 = complex(el.sqrt_upper_half(rho[2]))
        lambdas = ((1j * np.sqrt(-r1), 1), (-1j * np.sqrt(-r1), 1),
                   (lam2, 1), (-lam2, 1), (lam4, 1), (-lam4, 1))
        kind = "regular-complex"
    else:
        r1, rd = rho[0].real, rho[1].real
        if not (e1 < r1 < 0.0):
            raise DegenerateSpectrum(f"simple root {r1} outside (e1, 0)")
        lam2 = float(np.sqrt(rd))
        lambdas = ((1j * np.sqrt(-r1), 1), (-1j * np.sqrt(-r1), 1),
                   (complex(lam2), 2), (complex(-lam2), 2))
        kind = "exceptional"
        _check_fredholm(d, lam2)
        _check_fredholm(d, -lam2)

    return SpectralData(rho, kind, lambdas)


def _check_fredholm(d: cv.EllipticData, lam: float):
    """Solvability of (H(0) - lambda) x = L(0) for a double eigenvalue."""
    H0 = fr.momentum_matrix(fr.CurvatureSample.at(d, 0.0))
    L0 = eigenvector_map(lam, 0.0, d)
    A = H0.astype(complex) - lam * np.eye(6)
    x, *_ = np.linalg.lstsq(A, L0, rcond=None)
    res = np.linalg.norm(A @ x - L0) / max(np.linalg.norm(L0), 1e-300)
    if res > DEFAULTS.fredholm_tol:
        raise DegenerateSpectrum(
            f"generalized eigenvector equation unsolvable at lambda={lam}: "
            f"residual {res:.2e}")


def eigenvector_map(lam, u, d: cv.EllipticData) -> np.ndarray:
    """Closed-form eigenvector field of the momentum matrix.

    Returns the six components stacked on the last axis; complex for
    complex ``lam``.  For real ``lam`` the field vanishes exactly on its
    singular lattice (see :func:`singular_sets`).
    """
    u = np.asarray(u, dtype=float)
    v2 = cv.k2(u, d)
    v2d = cv.k2_dot(u, d)
    v1 = 1.5 * v2 ** 2 + d.c1
    v3 = d.c3 / v2 ** 2
    lam = complex(lam)
    if lam.imag == 0.0:
        lam = lam.real
    diff = lam ** 2 - v2 ** 2
    out = np.empty(np.shape(u) + (6,), dtype=complex if isinstance(lam, complex) else float)
    out[..., 0] = lam * diff * (lam ** 2 + v1 - v2 ** 2)
    out[..., 1] = lam * (lam - v2 * v2d)
    out[..., 2] = -lam ** 2 * diff
    out[..., 3] = lam * (lam * v2d - v2)
    out[..., 4] = v2 * v3 * diff
    out[..., 5] = lam * diff
    return out


def generalized_eigenvector_map(lam: float, u, d: cv.EllipticData,
                                guard: float = 0.0) -> np.ndarray:
    """Closed-form generalized eigenvector field for a real double eigenvalue.

    Satisfies H T = lam T + L off the pole lattice where lam^2 = k2^2.
    ``guard`` > 0 raises :class:`SingularPoint` when any sample sits within
    that distance of a pole (measured through |lam^2 - k2^2|).
    """
    from .errors import SingularPoint

    lam = float(lam)
    u = np.asarray(u, dtype=float)
    v2 = cv.k2(u, d)
    v2d = cv.k2_dot(u, d)
    diff = lam ** 2 - v2 ** 2
    if guard > 0.0 and np.any(np.abs(diff) < guard):
        raise SingularPoint("generalized eigenvector evaluated at a pole")
    out = np.empty(np.shape(u) + (6,))
    out[..., 0] = 0.5 * diff * (6.0 * lam ** 2 + 2.0 * d.c1 + v2 ** 2)
    out[..., 1] = v2 * (v2 ** 2 * v2d + lam ** 2 * v2d - 2.0 * lam * v2) / diff
    out[..., 2] = -2.0 * lam * diff
    out[..., 3] = v2 * (lam ** 2 + v2 ** 2 - 2.0 * lam * v2 * v2d) / diff
    out[..., 4] = 0.0
    out[..., 5] = diff
    return out


@dataclass(frozen=True)
class SingularSets:
    """Singular lattices of a real eigenvalue.

    ``zeros`` is the set where the eigenvector field vanishes,
    {n omega + sign(lam) p}; ``poles`` is the reflected lattice
    {n omega - sign(lam) p} where the generalized field blows up.
    """
    lam: float
    p: float
    omega: float

    @property
    def zero_offset(self) -> float:
        return self.p if self.lam > 0 else -self.p

    def nearest_zero(self, u):
        u = np.asarray(u, dtype=float)
        off = self.zero_offset
        return off + self.omega * np.round((u - off) / self.omega)

    def nearest_pole(self, u):
        u = np.asarray(u, dtype=float)
        off = -self.zero_offset
        return off + self.omega * np.round((u - off) / self.omega)

    def distance(self, u):
        """Distance to the union of both lattices."""
        u = np.asarray(u, dtype=float)
        return np.minimum(np.abs(u - self.nearest_zero(u)),
                          np.abs(u - self.nearest_pole(u)))

    def in_exclusion(self, u, radius: float):
        return self.distance(u) < radius

    def zero_crossings(self, u):
        """Signed count of zero-lattice points in (0, u]."""
        u = np.asarray(u, dtype=float)
        off = self.zero_offset
        return np.floor((u - off) / self.omega) - np.floor(-off / self.omega)


def singular_sets(lam: float, d: cv.EllipticData) -> SingularSets:
    """Zero/pole lattices of a real eigenvalue.

    The offset is p = sn^{-1}(1/alpha, m) / sqrt(l3) with
    alpha^2 = (l2 - lam^2 l4)/(l1 - lam^2 l3); p lies strictly inside
    (0, omega/2).
    """
    lam = float(lam)
    lam2 = lam * lam
    num = d.l2 - lam2 * d.l4
    den = d.l1 - lam2 * d.l3
    if den == 0.0 or num / den <= 0.0:
        raise AlphaOutOfRange(f"invalid zero locator for lambda = {lam}")
    alpha = np.sqrt(num / den)
    inv = 1.0 / alpha
    if not 0.0 <= inv <= 1.0:
        raise AlphaOutOfRange(
            f"1/alpha = {inv} outside [0, 1]; lambda = {lam} is not consistent")
    p = el.inverse_sn(inv, d.m) / d.sqrt_l3
    return SingularSets(lam, float(p), d.omega)
