"""Self-contained elliptic-function kernel.

Parameter convention: ``m`` is the *parameter* (square of the modulus), as
in DLMF chapters 19/22.  Jacobi functions take real arguments; integrals
take ``m in [0, 1)``.

Evaluation strategy:

* complete integrals by the arithmetic-geometric mean,
* Jacobi sn/cn/dn/am by the descending Landen (AGM) recursion of
  DLMF 22.20(ii) after reduction of the argument to [-K, K],
* incomplete integrals of the three kinds through Carlson symmetric forms
  RF/RC/RD/RJ (Carlson, Numer. Algorithms 10 (1995) 13-26), which accept
  complex arguments off the negative real axis,
* the first theta function by its sine series in the nome.
"""

import math
from functools import lru_cache

import numpy as np

from .config import DEFAULTS
from .errors import DomainError, PoleOnPath

__all__ = [
    "sqrt_upper_half",
    "complete_K",
    "complete_E",
    "jacobi",
    "jacobi_am",
    "inverse_sn",
    "incomplete_F",
    "incomplete_E",
    "incomplete_Pi",
    "jacobi_epsilon",
    "jacobi_zeta",
    "nome",
    "theta1",
    "carlson_rf",
    "carlson_rc",
    "carlson_rd",
    "carlson_rj",
]


def sqrt_upper_half(z):
    """Square root with non-negative imaginary part.

    The branch used for every eigenvalue extraction downstream: for ``z``
    off the positive real axis take the root in the closed upper half
    plane; positive reals keep their positive root.  Elementwise on arrays.
    """
    w = np.sqrt(np.asarray(z, dtype=complex))
    flip = (w.imag < 0) | ((w.imag == 0) & (w.real < 0))
    return np.where(flip, -w, w)


def _check_m(m: float) -> float:
    m = float(m)
    if not 0.0 <= m < 1.0:
        raise DomainError(f"parameter m must lie in [0, 1), got {m}")
    return m


@lru_cache(maxsize=256)
def _agm_chain(m: float):
    """AGM sequence (a_n, b_n, c_n) from (1, sqrt(1-m), sqrt(m))."""
    a = [1.0]
    b = [math.sqrt(1.0 - m)]
    c = [math.sqrt(m)]
    for _ in range(DEFAULTS.max_iter):
        an = 0.5 * (a[-1] + b[-1])
        bn = math.sqrt(a[-1] * b[-1])
        cn = 0.5 * (a[-1] - b[-1])
        a.append(an)
        b.append(bn)
        c.append(cn)
        if abs(cn) <= DEFAULTS.agm_rel * an:
            break
    return np.array(a), np.array(b), np.array(c)


def complete_K(m: float) -> float:
    """Complete elliptic integral of the first kind."""
    m = _check_m(m)
    a, _, _ = _agm_chain(m)
    return float(np.pi / (2.0 * a[-1]))


def complete_E(m: float) -> float:
    """Complete elliptic integral of the second kind."""
    m = _check_m(m)
    a, _, c = _agm_chain(m)
    n = np.arange(len(c))
    s = np.sum(2.0 ** (n - 1.0) * c ** 2)
    return float(np.pi / (2.0 * a[-1]) * (1.0 - s))


def jacobi(u, m: float):
    """Jacobi elliptic functions ``(sn, cn, dn, am)`` for real argument.

    ``am`` is the continuous amplitude with am(0) = 0, monotone for the
    relevant parameter range.  Vectorized in ``u``.  DLMF 22.20(ii)
    descending Landen recursion after reduction to [-K, K] via
    sn(u + 2K) = -sn(u), am(u + 2K) = am(u) + pi.
    """
    m = _check_m(m)
    u_in = np.asarray(u, dtype=float)
    scalar = u_in.ndim == 0
    u = np.atleast_1d(u_in)

    if m == 0.0:
        sn, cn, dn, am = np.sin(u), np.cos(u), np.ones_like(u), u.copy()
    else:
        a, _, c = _agm_chain(m)
        K = np.pi / (2.0 * a[-1])
        q = np.round(u / (2.0 * K))
        r = u - 2.0 * K * q
        n = len(a) - 1
        phi = (2.0 ** n) * a[-1] * r
        for i in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(np.clip(c[i] / a[i] * np.sin(phi), -1.0, 1.0)))
        sn = np.sin(phi)
        cn = np.cos(phi)
        dn = np.sqrt(np.maximum(1.0 - m * sn ** 2, 0.0))
        sign = 1.0 - 2.0 * (np.abs(q) % 2.0)
        am = phi + np.pi * q
        sn = sign * sn
        cn = sign * cn

    if scalar:
        return float(sn[0]), float(cn[0]), float(dn[0]), float(am[0])
    return sn, cn, dn, am


def jacobi_scalar(u: float, m: float):
    """Scalar fast path of :func:`jacobi` (plain-float arithmetic).

    Used inside ODE right-hand sides where per-call numpy overhead matters.
    """
    m = _check_m(m)
    if m == 0.0:
        return math.sin(u), math.cos(u), 1.0, u
    a, _, c = _agm_chain(m)
    K = math.pi / (2.0 * a[-1])
    q = round(u / (2.0 * K))
    r = u - 2.0 * K * q
    n = len(a) - 1
    phi = (2.0 ** n) * a[-1] * r
    for i in range(n, 0, -1):
        s = c[i] / a[i] * math.sin(phi)
        s = 1.0 if s > 1.0 else (-1.0 if s < -1.0 else s)
        phi = 0.5 * (phi + math.asin(s))
    sn = math.sin(phi)
    cn = math.cos(phi)
    dn = math.sqrt(max(1.0 - m * sn * sn, 0.0))
    am = phi + math.pi * q
    if q % 2:
        sn, cn = -sn, -cn
    return sn, cn, dn, am


def jacobi_am(u, m: float):
    """Continuous Jacobi amplitude."""
    return jacobi(u, m)[3]


def inverse_sn(x, m: float):
    """Inverse of sn on the principal branch: [0, 1] -> [0, K(m)].

    Equals F(arcsin x, m), computed as x * RF(1 - x^2, 1 - m x^2, 1).
    """
    m = _check_m(m)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError("inverse_sn requires x in [0, 1]")
    val = (x * carlson_rf(1.0 - x ** 2, 1.0 - m * x ** 2, 1.0)).real
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# Carlson symmetric integrals.  Duplication-theorem algorithms; valid for
# real or complex arguments with the principal square root, provided no
# argument lies on the negative real axis (RC handles that case by its
# Cauchy principal-value transformation).

def _as_c(*args):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=complex) for a in args])
    return [a.copy() for a in arrs]


def carlson_rf(x, y, z):
    """Symmetric integral RF(x, y, z)."""
    x, y, z = _as_c(x, y, z)
    x0, y0 = x.copy(), y.copy()
    a = (x + y + z) / 3.0
    a0 = a.copy()
    q = np.max(np.abs(np.stack([a - x, a - y, a - z])), axis=0)
    q = q / (3.0 * DEFAULTS.carlson_rel) ** (1.0 / 8.0)
    four_n = 1.0
    for _ in range(DEFAULTS.max_iter):
        if np.all(q * four_n < np.abs(a)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x = (x + lam) / 4.0
        y = (y + lam) / 4.0
        z = (z + lam) / 4.0
        a = (a + lam) / 4.0
        four_n *= 0.25
    X = (a0 - x0) / a * four_n
    Y = (a0 - y0) / a * four_n
    Z = -X - Y
    e2 = X * Y - Z ** 2
    e3 = X * Y * Z
    series = (1.0 - e2 / 10.0 + e3 / 14.0 + e2 ** 2 / 24.0 - 3.0 * e2 * e3 / 44.0
              - 5.0 * e2 ** 3 / 208.0 + 3.0 * e3 ** 2 / 104.0 + e2 ** 2 * e3 / 16.0)
    return series / np.sqrt(a)


def carlson_rc(x, y):
    """Degenerate integral RC(x, y); principal value for real negative y."""
    x, y = _as_c(x, y)
    neg = (y.real < 0) & (np.abs(y.imag) == 0.0)
    if np.any(neg):
        # Cauchy principal value: RC(x, y) = sqrt(x/(x-y)) RC(x-y, -y)
        xs = np.where(neg, x - y, x)
        ys = np.where(neg, -y, y)
        base = carlson_rc(xs, ys)
        fac = np.where(neg, np.sqrt(x / (x - y)), 1.0)
        return fac * base
    y0 = y.copy()
    a = (x + 2.0 * y) / 3.0
    a0 = a.copy()
    q = np.abs(a - x) / (3.0 * DEFAULTS.carlson_rel) ** (1.0 / 8.0)
    four_n = 1.0
    for _ in range(DEFAULTS.max_iter):
        if np.all(q * four_n < np.abs(a)):
            break
        lam = 2.0 * np.sqrt(x) * np.sqrt(y) + y
        x = (x + lam) / 4.0
        y = (y + lam) / 4.0
        a = (a + lam) / 4.0
        four_n *= 0.25
    s = (y0 - a0) / a * four_n
    series = (1.0 + 0.3 * s ** 2 + s ** 3 / 7.0 + 0.375 * s ** 4
              + 9.0 * s ** 5 / 22.0 + 159.0 * s ** 6 / 208.0 + 9.0 * s ** 7 / 8.0)
    return series / np.sqrt(a)


def carlson_rd(x, y, z):
    """Degenerate symmetric integral RD(x, y, z) = RJ(x, y, z, z)."""
    x, y, z = _as_c(x, y, z)
    x0, y0 = x.copy(), y.copy()
    a = (x + y + 3.0 * z) / 5.0
    a0 = a.copy()
    q = np.max(np.abs(np.stack([a - x, a - y, a - z])), axis=0)
    q = q / (DEFAULTS.carlson_rel / 4.0) ** (1.0 / 8.0)
    four_n = 1.0
    acc = np.zeros_like(a)
    for _ in range(DEFAULTS.max_iter):
        if np.all(q * four_n < np.abs(a)):
            break
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        acc = acc + four_n / (sz * (z + lam))
        x = (x + lam) / 4.0
        y = (y + lam) / 4.0
        z = (z + lam) / 4.0
        a = (a + lam) / 4.0
        four_n *= 0.25
    X = (a0 - x0) / a * four_n
    Y = (a0 - y0) / a * four_n
    Z = -(X + Y) / 3.0
    e2 = X * Y - 6.0 * Z ** 2
    e3 = (3.0 * X * Y - 8.0 * Z ** 2) * Z
    e4 = 3.0 * (X * Y - Z ** 2) * Z ** 2
    e5 = X * Y * Z ** 3
    series = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 ** 2 / 88.0
              - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return four_n * series / (a * np.sqrt(a)) + 3.0 * acc


def carlson_rj(x, y, z, p):
    """Symmetric integral RJ(x, y, z, p); complex p off the cut allowed."""
    x, y, z, p = _as_c(x, y, z, p)
    x0, y0, z0 = x.copy(), y.copy(), z.copy()
    a = (x + y + z + 2.0 * p) / 5.0
    a0 = a.copy()
    delta = (p - x) * (p - y) * (p - z)
    q = np.max(np.abs(np.stack([a - x, a - y, a - z, a - p])), axis=0)
    q = q / (DEFAULTS.carlson_rel / 4.0) ** (1.0 / 8.0)
    four_n = 1.0
    acc = np.zeros_like(a)
    for _ in range(DEFAULTS.max_iter):
        if np.all(q * four_n < np.abs(a)):
            break
        sx, sy, sz, sp = np.sqrt(x), np.sqrt(y), np.sqrt(z), np.sqrt(p)
        lam = sx * sy + sy * sz + sz * sx
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = (four_n ** 3) * delta / d ** 2
        acc = acc + four_n / d * carlson_rc(1.0, 1.0 + e)
        x = (x + lam) / 4.0
        y = (y + lam) / 4.0
        z = (z + lam) / 4.0
        p = (p + lam) / 4.0
        a = (a + lam) / 4.0
        four_n *= 0.25
    X = (a0 - x0) / a * four_n
    Y = (a0 - y0) / a * four_n
    Z = (a0 - z0) / a * four_n
    P = (-X - Y - Z) / 2.0
    e2 = X * Y + X * Z + Y * Z - 3.0 * P ** 2
    e3 = X * Y * Z + 2.0 * e2 * P + 4.0 * P ** 3
    e4 = (2.0 * X * Y * Z + e2 * P + 3.0 * P ** 3) * P
    e5 = X * Y * Z * P ** 2
    series = (1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 ** 2 / 88.0
              - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0)
    return four_n * series / (a * np.sqrt(a)) + 6.0 * acc


# ---------------------------------------------------------------------------
# Legendre-form incomplete integrals, extended to all real amplitudes by
# quasi-periodicity F(phi + pi) = F(phi) + 2K and its analogues.

def _reduce_phi(phi):
    phi = np.asarray(phi, dtype=float)
    k = np.round(phi / np.pi)
    return phi - np.pi * k, k


def incomplete_F(phi, m: float):
    """Incomplete elliptic integral of the first kind F(phi, m)."""
    m = _check_m(m)
    phi_in = np.asarray(phi, dtype=float)
    scalar = phi_in.ndim == 0
    phir, k = _reduce_phi(np.atleast_1d(phi_in))
    s, c = np.sin(phir), np.cos(phir)
    val = (s * carlson_rf(c ** 2, 1.0 - m * s ** 2, 1.0)).real
    val = val + 2.0 * k * complete_K(m)
    return float(val[0]) if scalar else val


def incomplete_E(phi, m: float):
    """Incomplete elliptic integral of the second kind E(phi, m)."""
    m = _check_m(m)
    phi_in = np.asarray(phi, dtype=float)
    scalar = phi_in.ndim == 0
    phir, k = _reduce_phi(np.atleast_1d(phi_in))
    s, c = np.sin(phir), np.cos(phir)
    y = 1.0 - m * s ** 2
    val = (s * carlson_rf(c ** 2, y, 1.0) - (m / 3.0) * s ** 3 * carlson_rd(c ** 2, y, 1.0)).real
    val = val + 2.0 * k * complete_E(m)
    return float(val[0]) if scalar else val


def complete_Pi(n, m: float):
    """Complete elliptic integral of the third kind Pi(n, m)."""
    m = _check_m(m)
    n = np.asarray(n)
    if np.isrealobj(n) and np.any(n.real >= 1.0):
        raise PoleOnPath("complete third-kind integral has a pole for n >= 1")
    val = carlson_rf(0.0, 1.0 - m, 1.0) + (n / 3.0) * carlson_rj(0.0, 1.0 - m, 1.0, 1.0 - n)
    return val if np.iscomplexobj(n) else val.real


def incomplete_Pi(n, phi, m: float):
    """Incomplete elliptic integral of the third kind Pi(n; phi | m).

    For real characteristic ``n`` the integrand pole at sin^2 = 1/n must
    stay off the path, otherwise :class:`PoleOnPath` is raised.  Complex
    ``n`` gives the analytic continuation fixed by Pi = 0 at phi = 0 and
    continuity along the real phi axis.
    """
    m = _check_m(m)
    n_c = complex(n)
    n_is_real = n_c.imag == 0.0
    phi_in = np.asarray(phi, dtype=float)
    scalar = phi_in.ndim == 0
    phir, k = _reduce_phi(np.atleast_1d(phi_in))
    s, c = np.sin(phir), np.cos(phir)
    if n_is_real and n_c.real >= 1.0:
        sin_pole = 1.0 / np.sqrt(n_c.real)
        if np.any(k != 0) or np.any(np.abs(s) >= sin_pole - 1e-14):
            raise PoleOnPath(
                f"integrand pole (n = {n_c.real}) lies on the integration path")
    n_val = n_c if not n_is_real else n_c.real
    y = 1.0 - m * s ** 2
    val = (s * carlson_rf(c ** 2, y, 1.0)
           + (n_val / 3.0) * s ** 3 * carlson_rj(c ** 2, y, 1.0, 1.0 - n_val * s ** 2))
    if np.any(k != 0):
        val = val + 2.0 * k * complete_Pi(n_val, m)
    if n_is_real:
        val = val.real
    return complex(val[0]) if (scalar and not n_is_real) else (
        float(val[0].real) if scalar else val)


def jacobi_epsilon(u, m: float):
    """Jacobi epsilon function: integral of dn^2 from 0 to u."""
    return incomplete_E(jacobi_am(u, m), m)


def jacobi_zeta(u, m: float):
    """Jacobi zeta function Z(u, m) = epsilon(u) - (E/K) u."""
    return jacobi_epsilon(u, m) - complete_E(m) / complete_K(m) * np.asarray(u, dtype=float)


def nome(m: float) -> float:
    """Nome q = exp(-pi K(1-m)/K(m))."""
    m = _check_m(m)
    if m == 0.0:
        return 0.0
    return float(np.exp(-np.pi * complete_K(1.0 - m) / complete_K(m)))


def theta1(z, q: float):
    """First Jacobi theta function, sine series in the nome.

    Truncated when the coefficient magnitude 2 q^((k+1/2)^2) drops below
    the configured relative level times the leading coefficient.
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"nome must lie in (0, 1), got {q}")
    z_in = np.asarray(z, dtype=float)
    scalar = z_in.ndim == 0
    z = np.atleast_1d(z_in)
    total = np.zeros_like(z)
    lead = q ** 0.25
    for k in range(DEFAULTS.max_iter):
        coeff = q ** ((k + 0.5) ** 2)
        if coeff < DEFAULTS.series_rel * lead and k > 0:
            break
        total = total + (-1.0) ** k * coeff * np.sin((2 * k + 1) * z)
    total = 2.0 * total
    return float(total[0]) if scalar else total
