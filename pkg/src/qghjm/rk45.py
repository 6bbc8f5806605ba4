"""Embedded Dormand-Prince 5(4) integrator with PI step-size control.

The integrator is deliberately small: fixed-size non-stiff systems, optional
output grid (steps are shortened to land exactly on requested times), and a
stop predicate evaluated on every accepted step. A trial step that produces
non-finite values is treated as a rejection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

# Dormand & Prince (1980), FSAL, 5th-order propagation
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array(_A[6] + [0.0])
# difference between 5th- and embedded 4th-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

ORDER = 5
_PI_ALPHA = 0.7 / ORDER
_PI_BETA = 0.4 / ORDER
_SAFETY = 0.9
_FAC_MIN, _FAC_MAX = 0.2, 10.0


@dataclass
class IntegrationResult:
    t: np.ndarray
    y: np.ndarray  # shape (n_times, n_dim)
    status: str  # "done" | "stopped" | "h_min" | "max_steps"
    bracket: Optional[tuple[float, float]] = None
    n_accepted: int = 0
    n_rejected: int = 0


def _rms(x):
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(fun, t0, y0, f0, rtol, atol, span):
    sc = atol + rtol * np.abs(y0)
    with np.errstate(over="ignore"):
        d0, d1 = _rms(y0 / sc), _rms(f0 / sc)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        # degenerate tolerances overflow the scaled norms
        if not (np.isfinite(h0) and h0 > 0):
            h0 = 1e-6
        h0 = min(h0, span)
        f1 = fun(t0 + h0, y0 + h0 * f0)
        d2 = _rms((f1 - f0) / sc) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / ORDER)
    if not (np.isfinite(h1) and h1 > 0):
        h1 = h0
    return min(100 * h0, h1, span)


def dopri45(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float],
    t_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    h_min: float = 0.0,
    h0: Optional[float] = None,
    t_eval: Optional[Sequence[float]] = None,
    stop: Optional[Callable[[float, np.ndarray], bool]] = None,
    max_steps: int = 1_000_000,
) -> IntegrationResult:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end``.

    Without ``t_eval`` every accepted step is recorded. With ``t_eval`` only
    those times (plus the stopping point, if ``stop`` fires) are recorded.
    When ``stop`` fires, ``bracket`` is the (previous, current) accepted time.
    """
    y = np.asarray(y0, dtype=float).copy()
    t = float(t0)
    span = float(t_end) - t
    if span <= 0:
        raise ValueError("t_end must exceed t0")

    if t_eval is None:
        targets = None
    else:
        targets = np.asarray(t_eval, dtype=float)
        targets = targets[(targets > t) & (targets <= t_end)]
    ti = 0

    ts, ys = [t], [y.copy()]
    k = np.empty((7, y.size))
    k[0] = fun(t, y)
    h = h0 if h0 is not None else _initial_step(fun, t, y, k[0], rtol, atol, span)
    err_prev = 1.0
    n_acc = n_rej = 0
    status = "done"
    bracket = None

    while t < t_end:
        if n_acc + n_rej >= max_steps:
            status = "max_steps"
            break
        if h < h_min:
            status = "h_min"
            break
        h_try = min(h, t_end - t)
        landing = None
        if targets is not None and ti < targets.size and t + h_try >= targets[ti]:
            h_try = targets[ti] - t
            landing = targets[ti]
        elif t + h_try >= t_end:
            landing = t_end

        for s in range(1, 7):
            ys_s = y + h_try * (np.dot(_A[s], k[:s]))
            k[s] = fun(t + _C[s] * h_try, ys_s)
        y_new = ys_s  # FSAL: stage 7 evaluates at the 5th-order solution
        err_vec = h_try * np.dot(_E, k)
        if np.all(np.isfinite(y_new)) and np.all(np.isfinite(k[6])):
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = _rms(err_vec / sc)
        else:
            err = np.inf

        if err <= 1.0:
            t_prev = t
            t = landing if landing is not None else t + h_try
            y = y_new
            k[0] = k[6]
            n_acc += 1
            fac = _SAFETY * max(err, 1e-10) ** (-_PI_ALPHA) * err_prev ** _PI_BETA
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            err_prev = max(err, 1e-4)
            # clipped steps do not shrink the controller's natural step
            h = max(h, h_try) * fac if landing is not None else h_try * fac
            hit = stop is not None and stop(t, y)
            if targets is None or hit or (landing is not None and ti < targets.size and landing == targets[ti]):
                ts.append(t)
                ys.append(y.copy())
            if landing is not None and targets is not None and ti < targets.size and landing == targets[ti]:
                ti += 1
            if hit:
                status = "stopped"
                bracket = (t_prev, t)
                break
        else:
            n_rej += 1
            if np.isfinite(err):
                fac = max(_FAC_MIN, _SAFETY * err ** (-1.0 / ORDER))
            else:
                fac = _FAC_MIN
            h = h_try * fac

    return IntegrationResult(np.array(ts), np.array(ys), status, bracket, n_acc, n_rej)
