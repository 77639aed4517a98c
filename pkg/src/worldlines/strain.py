"""Conformal-strain analysis of time-like curves given in the Minkowski
chart: null lifts, the strain quartic, vertex detection, the invariant arc
element and reparameterization by conformal parameter.

The strain coefficient at each sample is

    Q = < pr(G'''), pr(G''') > / |<G', G'>|^2-normalized

computed on the unit-speed rescaled lift, where pr projects orthogonally
off the second osculating space span(G, G', G'').  The projection uses the
pseudo-orthonormal basis

    A1 = (1 + <G'',G''>)/2 G - G'',   A2 = G',
    A3 = (1 - <G'',G''>)/2 G + G'',

with signature (-1, -1, +1), valid for any time-like curve.  Q transforms
as a quartic differential under reparameterization and is invariant under
the restricted conformal group and under rescaling of the lift.
"""

import io
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .config import DEFAULTS
from .errors import DegenerateOsculating, NotTimelike, VertexOnSegment
from .lorentz import minkowski_product, scalar_product

__all__ = [
    "SampledCurve",
    "LiftedPath",
    "null_lift",
    "osculating_basis",
    "strain_of_lift",
    "StrainReport",
    "conformal_strain",
    "reparameterize_by_conformal_parameter",
    "uniform_derivatives",
]


def _stencil_weights():
    # interior 5-point central stencils: O(h^4) for f', f''; O(h^2) for f'''
    d1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    d2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
    d3 = np.array([-1.0, 2.0, 0.0, -2.0, 1.0]) / 2.0
    return d1, d2, d3


def uniform_derivatives(t: np.ndarray, p: np.ndarray):
    """Derivatives up to third order on a uniform grid.

    Interior points use 5-point central stencils; the two samples at each
    edge reuse the stencil anchored at the boundary (reduced accuracy).
    """
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-8):
        raise ValueError("finite-difference derivatives require a uniform grid")
    h = float(h[0])
    n = len(t)
    if n < 5:
        raise ValueError("need at least 5 samples for the stencils")
    d1w, d2w, d3w = _stencil_weights()
    dp = np.empty_like(p)
    d2p = np.empty_like(p)
    d3p = np.empty_like(p)
    idx = np.arange(n)
    centers = np.clip(idx, 2, n - 3)
    for i, c0 in enumerate(centers):
        window = p[c0 - 2:c0 + 3]
        # off-center evaluation at the edges: differentiate the degree-4
        # interpolating polynomial of the window at the requested node
        if c0 == i:
            dp[i] = d1w @ window / h
            d2p[i] = d2w @ window / h ** 2
            d3p[i] = d3w @ window / h ** 3
        else:
            s = float(i - c0)
            for k in range(p.shape[1]):
                poly = np.polynomial.polynomial.polyfit(
                    np.arange(-2.0, 3.0), window[:, k], 4)
                der1 = np.polynomial.polynomial.polyder(poly, 1)
                der2 = np.polynomial.polynomial.polyder(poly, 2)
                der3 = np.polynomial.polynomial.polyder(poly, 3)
                dp[i, k] = np.polynomial.polynomial.polyval(s, der1) / h
                d2p[i, k] = np.polynomial.polynomial.polyval(s, der2) / h ** 2
                d3p[i, k] = np.polynomial.polynomial.polyval(s, der3) / h ** 3
    return dp, d2p, d3p


@dataclass
class SampledCurve:
    """Minkowski-chart curve samples with derivatives up to third order."""
    t: np.ndarray
    p: np.ndarray
    dp: np.ndarray
    d2p: np.ndarray
    d3p: np.ndarray
    position_fn: object | None = None

    @classmethod
    def from_arrays(cls, t, p) -> "SampledCurve":
        """Positions only; derivatives by finite differences."""
        t = np.asarray(t, dtype=float)
        p = np.asarray(p, dtype=float)
        dp, d2p, d3p = uniform_derivatives(t, p)
        return cls(t, p, dp, d2p, d3p)

    @classmethod
    def from_callable(cls, fn, t, derivatives=None) -> "SampledCurve":
        """Analytic source: fn(t) -> (4,); optional (fn', fn'', fn''')."""
        t = np.asarray(t, dtype=float)
        p = np.stack([np.asarray(fn(ti), dtype=float) for ti in t])
        if derivatives is not None:
            d1, d2, d3 = derivatives
            dp = np.stack([np.asarray(d1(ti), dtype=float) for ti in t])
            d2p = np.stack([np.asarray(d2(ti), dtype=float) for ti in t])
            d3p = np.stack([np.asarray(d3(ti), dtype=float) for ti in t])
        else:
            dp, d2p, d3p = uniform_derivatives(t, p)
        return cls(t, p, dp, d2p, d3p, position_fn=fn)

    @classmethod
    def from_csv(cls, text: str) -> "SampledCurve":
        """Columns t,p1..p4 with optional dp*, d2p*, d3p* blocks."""
        data = np.genfromtxt(io.StringIO(text), delimiter=",", names=True)
        names = data.dtype.names
        if names is None or "t" not in names:
            raise ValueError("curve CSV needs a header with a t column")
        t = np.asarray(data["t"], dtype=float)

        def block(prefix):
            cols = [f"{prefix}{i}" for i in range(1, 5)]
            if all(c in names for c in cols):
                return np.stack([np.asarray(data[c], dtype=float) for c in cols], axis=1)
            return None

        p = block("p")
        if p is None:
            raise ValueError("curve CSV needs columns p1..p4")
        dp, d2p, d3p = block("dp"), block("d2p"), block("d3p")
        if dp is None or d2p is None or d3p is None:
            dp, d2p, d3p = uniform_derivatives(t, p)
        return cls(t, p, dp, d2p, d3p)

    def velocity_norms(self):
        return minkowski_product(self.dp, self.dp)


@dataclass
class LiftedPath:
    """Null lift (1, p, (p,p)/2) with derivatives along the curve."""
    t: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    d2G: np.ndarray
    d3G: np.ndarray

    def transformed(self, B: np.ndarray) -> "LiftedPath":
        """Image of the lift under a conformal matrix (acts on each level)."""
        return LiftedPath(self.t, self.G @ B.T, self.dG @ B.T,
                          self.d2G @ B.T, self.d3G @ B.T)

    def rescaled(self, phi, dphi, d2phi, d3phi) -> "LiftedPath":
        """Lift multiplied by a scalar function (Leibniz to third order)."""
        f = np.asarray(phi)[:, None]
        f1 = np.asarray(dphi)[:, None]
        f2 = np.asarray(d2phi)[:, None]
        f3 = np.asarray(d3phi)[:, None]
        return LiftedPath(
            self.t,
            f * self.G,
            f1 * self.G + f * self.dG,
            f2 * self.G + 2.0 * f1 * self.dG + f * self.d2G,
            f3 * self.G + 3.0 * f2 * self.dG + 3.0 * f1 * self.d2G + f * self.d3G,
        )


def null_lift(curve: SampledCurve, timelike_tol: float = DEFAULTS.timelike_tol) -> LiftedPath:
    """Pathwise conformal embedding of the chart curve.

    Raises :class:`NotTimelike` unless (p', p') < 0 at every sample.
    """
    nu = curve.velocity_norms()
    if np.any(nu >= -timelike_tol):
        worst = float(nu.max())
        raise NotTimelike(f"curve is not time-like: max (p',p') = {worst:.3e}")
    n = len(curve.t)
    p, dp, d2p, d3p = curve.p, curve.dp, curve.d2p, curve.d3p
    G = np.empty((n, 6))
    dG = np.empty((n, 6))
    d2G = np.empty((n, 6))
    d3G = np.empty((n, 6))
    G[:, 0] = 1.0
    G[:, 1:5] = p
    G[:, 5] = 0.5 * minkowski_product(p, p)
    dG[:, 0] = 0.0
    dG[:, 1:5] = dp
    dG[:, 5] = minkowski_product(p, dp)
    d2G[:, 0] = 0.0
    d2G[:, 1:5] = d2p
    d2G[:, 5] = minkowski_product(dp, dp) + minkowski_product(p, d2p)
    d3G[:, 0] = 0.0
    d3G[:, 1:5] = d3p
    d3G[:, 5] = 3.0 * minkowski_product(dp, d2p) + minkowski_product(p, d3p)
    return LiftedPath(curve.t, G, dG, d2G, d3G)


def _unit_speed_lift(lift: LiftedPath):
    """Rescale so <G',G'> = -1; returns (Ghat, Ghat', Ghat'', phi)."""
    nu = scalar_product(lift.dG, lift.dG)
    if np.any(nu >= 0.0):
        raise NotTimelike("lift velocity is not time-like")
    nu1 = 2.0 * scalar_product(lift.dG, lift.d2G)
    nu2 = 2.0 * (scalar_product(lift.d2G, lift.d2G)
                 + scalar_product(lift.dG, lift.d3G))
    neg = -nu
    phi = neg ** -0.5
    phi1 = 0.5 * nu1 * neg ** -1.5
    phi2 = 0.5 * nu2 * neg ** -1.5 + 0.75 * nu1 ** 2 * neg ** -2.5
    Gh = phi[:, None] * lift.G
    dGh = phi1[:, None] * lift.G + phi[:, None] * lift.dG
    d2Gh = (phi2[:, None] * lift.G + 2.0 * phi1[:, None] * lift.dG
            + phi[:, None] * lift.d2G)
    return Gh, dGh, d2Gh, phi


def osculating_basis(lift: LiftedPath, tol: float = 1e-6):
    """Pseudo-orthonormal basis (A1, A2, A3) of the second osculating
    spaces, signature (-1, -1, +1)."""
    Gh, dGh, d2Gh, _ = _unit_speed_lift(lift)
    w = scalar_product(d2Gh, d2Gh)
    A1 = 0.5 * (1.0 + w)[:, None] * Gh - d2Gh
    A2 = dGh
    A3 = 0.5 * (1.0 - w)[:, None] * Gh + d2Gh
    gram_dev = max(
        float(np.abs(scalar_product(A1, A1) + 1.0).max()),
        float(np.abs(scalar_product(A2, A2) + 1.0).max()),
        float(np.abs(scalar_product(A3, A3) - 1.0).max()),
        float(np.abs(scalar_product(A1, A3)).max()),
    )
    if not np.isfinite(gram_dev) or gram_dev > tol:
        raise DegenerateOsculating(
            f"osculating basis degenerate: gram deviation {gram_dev:.3e}")
    return A1, A2, A3


def strain_of_lift(lift: LiftedPath) -> np.ndarray:
    """Strain quartic coefficient, independent of the choice of lift."""
    A1, A2, A3 = osculating_basis(lift)
    _, _, _, phi = _unit_speed_lift(lift)
    X = phi[:, None] * lift.d3G  # projection of the rescaled third derivative
    proj = X - (-scalar_product(X, A1)[:, None] * A1
                - scalar_product(X, A2)[:, None] * A2
                + scalar_product(X, A3)[:, None] * A3)
    return scalar_product(proj, proj)


@dataclass
class StrainReport:
    """Strain coefficient, density, vertex flags and arc-parameter table."""
    t: np.ndarray
    Q: np.ndarray
    density: np.ndarray
    vertex: np.ndarray
    arc: np.ndarray
    totally_degenerate: bool

    def to_payload(self) -> dict:
        return {
            "schema": "worldlines/strain/1",
            "t": self.t.tolist(),
            "strain": self.Q.tolist(),
            "density": self.density.tolist(),
            "vertex": [bool(v) for v in self.vertex],
            "arc": self.arc.tolist(),
            "totally_degenerate": self.totally_degenerate,
        }

    def to_csv(self) -> str:
        lines = ["t,strain,density,vertex,arc"]
        for i in range(len(self.t)):
            lines.append(f"{self.t[i]!r},{self.Q[i]!r},{self.density[i]!r},"
                         f"{int(self.vertex[i])},{self.arc[i]!r}")
        return "\n".join(lines) + "\n"


def conformal_strain(curve: SampledCurve,
                     vertex_tol: float = DEFAULTS.vertex_rel) -> StrainReport:
    """Strain analysis of a chart curve.

    Vertices are flagged where |Q| falls below ``vertex_tol`` times the
    maximum over the segment; a curve with vanishing maximum is reported
    totally degenerate (its trajectory lies on a one-dimensional cycle).
    """
    lift = null_lift(curve)
    Q = strain_of_lift(lift)
    qmax = float(np.abs(Q).max())
    degenerate = qmax <= 1e-14 * max(1.0, float(np.abs(curve.p).max()))
    vertex = np.abs(Q) < vertex_tol * qmax if not degenerate else np.ones_like(Q, dtype=bool)
    density = np.abs(Q) ** 0.25
    arc = np.concatenate([[0.0], np.cumsum(
        0.5 * (density[1:] + density[:-1]) * np.diff(curve.t))])
    return StrainReport(curve.t, Q, density, vertex, arc, bool(degenerate))


def reparameterize_by_conformal_parameter(curve: SampledCurve, report: StrainReport,
                                          n_samples: int | None = None) -> SampledCurve:
    """Resample the curve on a uniform grid of its conformal parameter.

    The arc table is inverted with a monotone cubic (PCHIP); positions come
    from the analytic source when the curve has one, otherwise from a cubic
    spline through the samples; derivatives with respect to the new
    parameter are rebuilt by the uniform stencils.
    """
    if report.totally_degenerate or bool(report.vertex[1:-1].any()):
        raise VertexOnSegment("cannot reparameterize across conformal vertices")
    if np.any(np.diff(report.arc) <= 0.0):
        raise VertexOnSegment("arc parameter is not strictly increasing")
    n = n_samples or len(curve.t)
    t_of_u = PchipInterpolator(report.arc, curve.t)
    u_new = np.linspace(report.arc[0], report.arc[-1], n)
    t_new = t_of_u(u_new)
    if curve.position_fn is not None:
        p_new = np.stack([np.asarray(curve.position_fn(ti), dtype=float) for ti in t_new])
    else:
        p_new = CubicSpline(curve.t, curve.p, axis=0)(t_new)
    dp, d2p, d3p = uniform_derivatives(u_new, p_new)
    return SampledCurve(u_new, p_new, dp, d2p, d3p)
