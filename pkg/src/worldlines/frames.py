"""Canonical frame dynamics: the linear system B' = B K, the conserved
momentum matrix, an adaptive ODE oracle for the frame path, Lax and
conservation residuals, and constant-curvature orbits.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import curvature as cv
from .config import DEFAULTS
from .errors import ConstraintViolated
from .lorentz import NullRay, metric_matrix
from .rk import dp54_integrate

__all__ = [
    "CurvatureSample",
    "curvature_matrix",
    "momentum_matrix",
    "momentum_matrix_dot",
    "char_poly_coeffs",
    "FramePath",
    "integrate_frame",
    "LaxReport",
    "lax_and_conservation_residuals",
    "constant_curvature_frame",
    "constant_curvature_orbit",
]

_M = metric_matrix()


@dataclass(frozen=True)
class CurvatureSample:
    """Curvatures and the derivative of the middle one at a single u."""
    u: float
    k1: float
    k2: float
    k3: float
    k2_dot: float

    @classmethod
    def at(cls, d: cv.EllipticData, u: float) -> "CurvatureSample":
        v1, v2, v3, v2d = cv.curvature_state(float(u), d)
        return cls(float(u), float(v1), float(v2), float(v3), float(v2d))


def curvature_matrix(s: CurvatureSample) -> np.ndarray:
    """Coefficient matrix K of the canonical frame system B' = B K."""
    k1, k2, k3 = s.k1, s.k2, s.k3
    K = np.zeros((6, 6))
    K[0, 1] = -k1
    K[0, 2] = 1.0
    K[1, 0] = 1.0
    K[1, 5] = k1
    K[2, 3] = -k2
    K[2, 5] = 1.0
    K[3, 2] = k2
    K[3, 4] = -k3
    K[4, 3] = k3
    K[5, 1] = -1.0
    return K


def momentum_matrix(s: CurvatureSample) -> np.ndarray:
    """Momentum operator H(u) expressed through the curvatures."""
    k1, k2, k3, k2d = s.k1, s.k2, s.k3, s.k2_dot
    H = np.zeros((6, 6))
    H[0, 1] = -1.0
    H[0, 2] = -(k2 ** 2 - k1)
    H[0, 3] = k2d
    H[0, 4] = k2 * k3
    H[1, 3] = -k2
    H[1, 5] = 1.0
    H[2, 0] = -1.0
    H[2, 5] = -(k2 ** 2 - k1)
    H[3, 1] = -k2
    H[3, 5] = k2d
    H[4, 5] = k2 * k3
    H[5, 2] = -1.0
    return H


def momentum_matrix_dot(d: cv.EllipticData, u: float) -> np.ndarray:
    """Analytic u-derivative of the momentum matrix entries.

    Uses k1' = 3 k2 k2', so (k2^2 - k1)' = -k2 k2', and
    (k2 k3)' = -c3 k2' / k2^2.
    """
    k2 = float(cv.k2(u, d))
    k2d = float(cv.k2_dot(u, d))
    k2dd = float(cv.k2_ddot(u, d))
    Hd = np.zeros((6, 6))
    Hd[0, 2] = Hd[2, 5] = k2 * k2d
    Hd[0, 3] = Hd[3, 5] = k2dd
    Hd[0, 4] = Hd[4, 5] = -d.c3 * k2d / k2 ** 2
    Hd[1, 3] = Hd[3, 1] = -k2d
    return Hd


def char_poly_coeffs(d: cv.EllipticData) -> np.ndarray:
    """Coefficients of t^6 + 2 c1 t^4 + (c2 + 1) t^2 + c3^2, descending powers."""
    return np.array([1.0, 0.0, 2.0 * d.c1, 0.0, d.c2 + 1.0, 0.0, d.c3 ** 2])


@dataclass
class FramePath:
    """Sampled solution of the canonical frame system with B(0) = Id."""
    d: cv.EllipticData
    grid: np.ndarray
    B: np.ndarray               # shape (n, 6, 6)
    local_error: np.ndarray     # accumulated per-step error estimates
    metric_defect: np.ndarray   # ||B^T m B - m||_inf per sample

    def frame_at_index(self, i: int) -> np.ndarray:
        return self.B[i]

    def to_json(self) -> str:
        payload = {
            "schema": "worldlines/framepath/1",
            "phase_params": list(self.d.e.as_tuple()),
            "grid": self.grid.tolist(),
            "matrices": self.B.reshape(len(self.grid), 36).tolist(),
            "local_error": self.local_error.tolist(),
            "metric_defect": self.metric_defect.tolist(),
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FramePath":
        payload = json.loads(text)
        if payload.get("schema") != "worldlines/framepath/1":
            raise ValueError("unknown frame-path schema")
        d = cv.derive_elliptic_data(cv.PhaseParams(*payload["phase_params"]))
        grid = np.asarray(payload["grid"])
        B = np.asarray(payload["matrices"]).reshape(len(grid), 6, 6)
        return cls(d, grid, B,
                   np.asarray(payload["local_error"]),
                   np.asarray(payload["metric_defect"]))


def _metric_defect(B: np.ndarray) -> np.ndarray:
    return np.abs(np.einsum("nji,jk,nkl->nil", B, _M, B) - _M).max(axis=(1, 2))


def integrate_frame(d: cv.EllipticData, u_max: float, tol: float = DEFAULTS.ode_tol,
                    n_samples: int = 257, grid=None, fixed_step=None) -> FramePath:
    """Adaptive DP5(4) solution of B' = B K(u) from B(0) = Id.

    ``tol`` is a global metric-defect budget within
    [ode_tol_min, ode_tol_max]; output samples are hit exactly by step
    chopping.  ``fixed_step`` switches off adaptivity for convergence
    studies.
    """
    if fixed_step is None and not (DEFAULTS.ode_tol_min <= tol <= DEFAULTS.ode_tol_max):
        raise ValueError(f"tol must lie in [{DEFAULTS.ode_tol_min}, {DEFAULTS.ode_tol_max}]")
    if grid is None:
        grid = np.linspace(0.0, u_max, n_samples)
    else:
        grid = np.asarray(grid, dtype=float)

    K = np.zeros((6, 6))
    K[0, 2] = K[1, 0] = K[2, 5] = 1.0
    K[5, 1] = -1.0

    def rhs(u, B):
        v1, v2, v3, _ = cv.curvature_state(u, d)
        K[0, 1] = -v1
        K[1, 5] = v1
        K[2, 3] = -v2
        K[3, 2] = v2
        K[3, 4] = -v3
        K[4, 3] = v3
        return B @ K

    B, local_error = dp54_integrate(rhs, np.eye(6), grid, tol=tol, fixed_step=fixed_step)
    return FramePath(d, grid, B, local_error, _metric_defect(B))


@dataclass(frozen=True)
class LaxReport:
    lax_residual: float
    conservation_residual: float


def lax_and_conservation_residuals(path: FramePath) -> LaxReport:
    """Max-norm Lax residual ||H' - [H, K]|| and conservation residual
    ||B H B^-1 - H(0)|| along the sampled path."""
    d = path.d
    H0 = momentum_matrix(CurvatureSample.at(d, 0.0))
    lax = 0.0
    cons = 0.0
    for u, B in zip(path.grid, path.B):
        s = CurvatureSample.at(d, float(u))
        H = momentum_matrix(s)
        K = curvature_matrix(s)
        Hd = momentum_matrix_dot(d, float(u))
        lax = max(lax, float(np.abs(Hd - (H @ K - K @ H)).max()))
        transported = B @ H @ np.linalg.inv(B)
        cons = max(cons, float(np.abs(transported - H0).max()))
    return LaxReport(lax, cons)


def constant_curvature_frame(k1: float, k2: float, k3: float, u: float,
                             tol: float = 1e-12) -> np.ndarray:
    """exp(u K) for constant curvatures satisfying k1 = (k2^2 + k3^2)/2."""
    if abs(k1 - 0.5 * (k2 ** 2 + k3 ** 2)) > tol:
        raise ConstraintViolated(
            "constant-curvature orbits require k1 = (k2^2 + k3^2)/2")
    if k2 <= 0 or k3 <= 0:
        raise ConstraintViolated("constant-curvature orbits require k2, k3 > 0")
    K = curvature_matrix(CurvatureSample(0.0, k1, k2, k3, 0.0))
    return expm(u * K)


def constant_curvature_orbit(k1: float, k2: float, k3: float, u: float) -> NullRay:
    """Orbit point exp(u K) E0 of a constant-curvature world-line."""
    return NullRay(constant_curvature_frame(k1, k2, k3, u)[:, 0], check=False)
