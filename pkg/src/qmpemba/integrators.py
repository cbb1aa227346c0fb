"""Runge-Kutta integrators over complex matrix-valued states.

``rk4_fixed`` is the plain classical scheme used as an independent route for
the linear master equation.  ``rk45_adaptive`` is an embedded Dormand-Prince
5(4) pair with cubic-Hermite dense output, used for the nonlinear dynamics.
"""

from __future__ import annotations

import numpy as np

from .errors import StepSizeUnderflow

# Dormand-Prince 5(4) tableau (FSAL).
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
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

MIN_STEP_FACTOR = 1e-14


def rk4_fixed(rhs, y0, times, max_step):
    """Classical fixed-step RK4; returns the state at each requested time.

    Substeps of size <= max_step are taken between consecutive sample times.
    """
    times = np.asarray(times, dtype=float)
    y = np.array(y0, dtype=complex)
    out = [y.copy()]
    t = times[0]
    for t_next in times[1:]:
        span = t_next - t
        n_sub = max(1, int(np.ceil(span / max_step)))
        h = span / n_sub
        for _ in range(n_sub):
            k1 = rhs(t, y)
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        t = t_next
        out.append(y.copy())
    return out


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((np.abs(err) / scale) ** 2)))


def _hermite(t, t0, h, y0, y1, f0, f1):
    theta = (t - t0) / h
    return (
        (1 - theta) * y0
        + theta * y1
        + theta * (theta - 1)
        * ((1 - 2 * theta) * (y1 - y0) + (theta - 1) * h * f0 + theta * h * f1)
    )


def rk45_adaptive(
    rhs,
    y0,
    times,
    *,
    rtol=1e-8,
    atol=1e-10,
    max_step=np.inf,
    first_step=None,
    monitor=None,
):
    """Adaptive Dormand-Prince integration with dense output at ``times``.

    ``monitor(t, y) -> y`` runs after every accepted step and may return a
    repaired state (or the same object).  Returns ``(samples, stats)`` where
    samples[k] is the state at times[k].

    Raises StepSizeUnderflow when error control pushes the step below
    ``MIN_STEP_FACTOR * max(1, |t|)``.
    """
    times = np.asarray(times, dtype=float)
    t = float(times[0])
    t_end = float(times[-1])
    y = np.array(y0, dtype=complex)
    stats = {"n_steps": 0, "n_rejected": 0, "n_rhs": 0}

    samples = [None] * len(times)
    next_sample = 0
    while next_sample < len(times) and times[next_sample] <= t:
        samples[next_sample] = y.copy()
        next_sample += 1

    f = rhs(t, y)
    stats["n_rhs"] += 1
    if first_step is None:
        scale = np.linalg.norm(f) / max(np.linalg.norm(y), atol)
        h = min(1e-2 / max(scale, 1e-2), max_step, t_end - t if t_end > t else 1.0)
    else:
        h = float(first_step)

    k = [None] * 7
    while t < t_end:
        h = min(h, t_end - t, max_step)
        if h < MIN_STEP_FACTOR * max(1.0, abs(t)):
            raise StepSizeUnderflow(f"step {h:.3e} at t = {t:.6g}")
        k[0] = f
        for i in range(1, 7):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_A[i]))
            k[i] = rhs(t + _C[i] * h, yi)
        stats["n_rhs"] += 6
        y_new = y + h * sum(b * ki for b, ki in zip(_B5, k) if b != 0.0)
        err = h * sum(e * ki for e, ki in zip(_E, k) if e != 0.0)
        norm = _error_norm(err, y, y_new, rtol, atol)
        if norm <= 1.0:
            t_new = t + h
            f_new = k[6]  # FSAL: stage 7 is rhs(t+h, y_new)
            if monitor is not None:
                y_mon = monitor(t_new, y_new)
                if y_mon is not y_new:
                    y_new = y_mon
                    f_new = rhs(t_new, y_new)
                    stats["n_rhs"] += 1
            while next_sample < len(times) and times[next_sample] <= t_new:
                ts = times[next_sample]
                if ts >= t_new:
                    samples[next_sample] = y_new.copy()
                else:
                    samples[next_sample] = _hermite(ts, t, h, y, y_new, f, f_new)
                next_sample += 1
            t, y, f = t_new, y_new, f_new
            stats["n_steps"] += 1
            factor = 5.0 if norm == 0.0 else min(5.0, max(0.2, 0.9 * norm**-0.2))
            h *= factor
        else:
            stats["n_rejected"] += 1
            h *= max(0.2, 0.9 * norm**-0.2)

    while next_sample < len(times):
        samples[next_sample] = y.copy()
        next_sample += 1
    return samples, stats
