"""Linear algebra of the signature-(2,4) light-cone model.

Vectors are numpy arrays of shape (6,), matrices of shape (6, 6), indexed by
the standard light-cone basis E0..E5.  The scalar product is

    <Y, Z> = -(y0 z5 + y5 z0) - y1 z1 + y2 z2 + y3 z3 + y4 z4,

points of the compactified Lorentzian space are oriented isotropic rays
[V], and the restricted conformal group is the set of matrices preserving
the product, the volume form and the positive half-cone of isotropic
bivectors.
"""

from dataclasses import dataclass

import numpy as np

from .config import DEFAULTS
from .errors import ChartSingular

__all__ = [
    "metric_matrix",
    "scalar_product",
    "orientation_functional",
    "FrameCheck",
    "is_conformal_frame",
    "is_lie_algebra_element",
    "random_algebra_element",
    "NullRay",
    "minkowski_embed",
    "minkowski_chart",
    "minkowski_product",
]

_M = np.zeros((6, 6))
_M[0, 5] = _M[5, 0] = -1.0
_M[1, 1] = -1.0
_M[2, 2] = _M[3, 3] = _M[4, 4] = 1.0
_M.setflags(write=False)


def metric_matrix() -> np.ndarray:
    """Gram matrix of the scalar product in the light-cone basis."""
    return _M.copy()


def scalar_product(y, z):
    """Signature-(2,4) product; supports stacked inputs of shape (..., 6)."""
    y = np.asarray(y)
    z = np.asarray(z)
    return (-(y[..., 0] * z[..., 5] + y[..., 5] * z[..., 0])
            - y[..., 1] * z[..., 1]
            + y[..., 2] * z[..., 2]
            + y[..., 3] * z[..., 3]
            + y[..., 4] * z[..., 4])


def orientation_functional(v, w) -> float:
    """Volume form evaluated on (v, w, E2, E3, E4, E5 - E0).

    Positive exactly on the positive half-cone of isotropic bivectors;
    the argument list is fixed by requiring a positive value on
    E0 ^ (E1 + E2), the bivector of the identity frame.
    """
    cols = np.zeros((6, 6))
    cols[:, 0] = v
    cols[:, 1] = w
    cols[2, 2] = cols[3, 3] = cols[4, 4] = 1.0
    cols[5, 5] = 1.0
    cols[0, 5] = -1.0
    return float(np.linalg.det(cols))


@dataclass(frozen=True)
class FrameCheck:
    """Residual report of a group-membership test."""
    metric_residual: float
    det_residual: float
    orientation_value: float
    ok: bool


def is_conformal_frame(b: np.ndarray, tol: float = DEFAULTS.frame_tol) -> FrameCheck:
    """Test membership in the restricted conformal group.

    Checks ``b^T m b = m`` and ``det b = 1`` within ``tol`` and that the
    bivector of the first two frame legs lies in the positive half cone.
    """
    b = np.asarray(b, dtype=float)
    metric_res = float(np.abs(b.T @ _M @ b - _M).max())
    det_res = float(abs(np.linalg.det(b) - 1.0))
    orient = orientation_functional(b[:, 0], b[:, 1] + b[:, 2])
    ok = (metric_res <= tol and det_res <= tol
          and orient > DEFAULTS.orientation_tol)
    return FrameCheck(metric_res, det_res, orient, ok)


def is_lie_algebra_element(x: np.ndarray, tol: float = DEFAULTS.frame_tol) -> bool:
    """True iff ``x^T m + m x`` vanishes within ``tol``."""
    x = np.asarray(x)
    return bool(np.abs(x.T @ _M + _M @ x).max() <= tol)


def random_algebra_element(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random element of the Lie algebra: m times a skew matrix."""
    w = rng.standard_normal((6, 6))
    w = (w - w.T) / 2.0
    return scale * (_M @ w)


class NullRay:
    """Oriented isotropic ray through the origin.

    The stored representative is rescaled by a positive factor so that its
    largest-magnitude entry is +1 or -1; this keeps comparison of rays a
    plain vector comparison while preserving orientation (only positive
    rescaling is ever applied).
    """

    __slots__ = ("rep",)

    def __init__(self, v, tol: float = 1e-9, check: bool = True):
        v = np.asarray(v, dtype=float)
        scale = np.abs(v).max()
        if scale == 0.0:
            raise ValueError("zero vector spans no ray")
        rep = v / scale
        if check:
            iso = abs(scalar_product(rep, rep))
            if iso > tol:
                raise ValueError(f"vector is not isotropic: <v,v> = {iso:.3e}")
        self.rep = rep
        self.rep.setflags(write=False)

    def projective_rep(self) -> np.ndarray:
        """Sign-normalized representative (first significant entry positive)."""
        rep = self.rep
        idx = np.flatnonzero(np.abs(rep) > 1e-12)
        if idx.size and rep[idx[0]] < 0:
            return -rep
        return rep.copy()

    def __repr__(self):
        return f"NullRay({np.array2string(self.rep, precision=6)})"


def minkowski_product(p, q):
    """Lorentzian product -p1 q1 + p2 q2 + p3 q3 + p4 q4 on chart coordinates."""
    p = np.asarray(p)
    q = np.asarray(q)
    return (-p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1]
            + p[..., 2] * q[..., 2] + p[..., 3] * q[..., 3])


def minkowski_embed(p) -> NullRay:
    """Conformal embedding of a Minkowski point as the ray of (1, p, (p,p)/2)."""
    p = np.asarray(p, dtype=float)
    v = np.empty(6)
    v[0] = 1.0
    v[1:5] = p
    v[5] = 0.5 * minkowski_product(p, p)
    return NullRay(v, check=False)


def minkowski_chart(ray: NullRay, tol: float = 1e-12):
    """Left inverse of :func:`minkowski_embed`.

    Raises :class:`ChartSingular` when the ray sits at conformal infinity
    (vanishing first light-cone coordinate).
    """
    rep = ray.rep
    if abs(rep[0]) <= tol:
        raise ChartSingular("ray lies at conformal infinity (y0 = 0)")
    return rep[1:5] / rep[0]
