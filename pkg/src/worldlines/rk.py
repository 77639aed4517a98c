"""Embedded Dormand-Prince 5(4) stepper for matrix linear systems.

Integrates B' = B * C(u) from an initial matrix, landing exactly on every
requested output point (steps are chopped at grid nodes, so no interpolant
error enters the stored samples).

Step control: ``tol`` is a *global* error budget for the whole span.  Each
step must satisfy ``err <= tol * h / (span * margin)`` with a margin that
derates by the solution magnitude, so the accumulated local errors stay
below ``tol`` after propagation.  A fixed-step mode (no rejection,
constant h) supports order-of-convergence verification by step halving.
"""

import numpy as np

from .errors import StepSizeUnderflow

__all__ = ["dp54_integrate"]

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = _B5 - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                       -92097 / 339200, 187 / 2100, 1 / 40])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _step(rhs, u, y, h, k1):
    """One DP54 step; returns (y5, err_inf, k_last), reusing k1 (FSAL)."""
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kk for a, kk in zip(_A[i], k))
        k.append(rhs(u + _C[i] * h, yi))
    y5 = y + h * sum(b * kk for b, kk in zip(_B5, k) if b != 0.0)
    err = h * sum(e * kk for e, kk in zip(_ERR, k) if e != 0.0)
    return y5, float(np.abs(err).max()), k[-1]


def dp54_integrate(rhs, y0, grid, tol=1e-10, fixed_step=None, max_steps=2_000_000):
    """Integrate y' = rhs(u, y) over ``grid`` (sorted, grid[0] = start).

    Returns (ys, local_error): solution at every grid node and the running
    accumulation of accepted per-step error estimates.
    """
    grid = np.asarray(grid, dtype=float)
    span = float(grid[-1] - grid[0])
    if span <= 0.0:
        raise ValueError("grid must advance")
    y = np.array(y0, dtype=float)
    ys = np.empty((len(grid),) + y.shape)
    ys[0] = y
    local_error = np.zeros(len(grid))
    acc_err = 0.0

    u = float(grid[0])
    k1 = rhs(u, y)
    h = float(fixed_step) if fixed_step is not None else min(1e-2 * span, 0.1)
    idx = 1
    steps = 0
    rejected_last = False
    while idx < len(grid):
        if steps >= max_steps:
            raise StepSizeUnderflow("step budget exhausted")
        target = grid[idx]
        h_try = min(h, target - u)
        truncated = h_try < 0.999 * h
        if h_try <= abs(u) * 1e-15 + 1e-300:
            raise StepSizeUnderflow(f"step underflow at u = {u}")
        y_new, err, k_last = _step(rhs, u, y, h_try, k1)
        steps += 1
        if fixed_step is not None:
            accept = True
        else:
            margin = 10.0 * (1.0 + float(np.abs(y).max()))
            budget = tol * h_try / (span * margin)
            ratio = err / budget if budget > 0.0 else np.inf
            accept = ratio <= 1.0
            if ratio == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * ratio ** -0.2))
            if not accept:
                factor = min(factor, 0.5)
            elif rejected_last:
                factor = min(factor, 1.0)
            if accept and truncated:
                # chopped step: its small error says nothing about h
                pass
            else:
                h = h_try * factor
            rejected_last = not accept
        if accept:
            u = u + h_try
            y = y_new
            k1 = k_last
            acc_err += err
            if u >= target - 1e-14 * max(1.0, abs(target)):
                u = float(target)
                ys[idx] = y
                local_error[idx] = acc_err
                idx += 1
    return ys, local_error
