"""Hot numeric kernels: population moves and batch benchmark evaluation.

Each kernel exists twice, a numba ``@njit`` loop and a vectorized numpy
version. Set ``SCCSA_DISABLE_NUMBA=1`` before import to force the numpy path
(also used automatically when numba is not installed). Both paths agree to
rounding; a given seed is bit-reproducible within one backend.
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_DISABLED = os.environ.get("SCCSA_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = numba is not None and not NUMBA_DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


# --- numpy reference path -------------------------------------------------

def move_numpy(x, target, r1, r2, r3, r4, r_flight, fl, sine_cut, cosine_cut, signed):
    """Three-branch population move.

    Row ``i`` takes the sine branch when ``r4[i] < sine_cut``, the cosine
    branch when ``sine_cut <= r4[i] < cosine_cut`` and the crow flight
    otherwise. ``r1``, ``r4`` and ``r_flight`` have one entry per row.
    """
    a = r1[:, None]
    dist = np.abs(r3 * target - x)
    sine = x + a * np.sin(r2) * dist
    cosine = x + a * np.cos(r2) * dist
    diff = (target - x) if signed else np.abs(target - x)
    crow = x + (r_flight * fl)[:, None] * diff
    branch = np.where(r4 < sine_cut, 0, np.where(r4 < cosine_cut, 1, 2))[:, None]
    return np.where(branch == 0, sine, np.where(branch == 1, cosine, crow))


def sphere_numpy(x):
    return np.sum(x * x, axis=1)


def schwefel_2_22_numpy(x):
    ax = np.abs(x)
    return np.sum(ax, axis=1) + np.prod(ax, axis=1)


def schwefel_1_2_numpy(x):
    c = np.cumsum(x, axis=1)
    return np.sum(c * c, axis=1)


def schwefel_2_21_numpy(x):
    return np.max(np.abs(x), axis=1)


def rosenbrock_numpy(x):
    head, tail = x[:, :-1], x[:, 1:]
    return np.sum(100.0 * (tail - head * head) ** 2 + (head - 1.0) ** 2, axis=1)


def step_numpy(x):
    s = np.floor(x + 0.5)
    return np.sum(s * s, axis=1)


def quartic_numpy(x):
    i = np.arange(1, x.shape[1] + 1, dtype=np.float64)
    v = x * x
    return np.sum(i * (v * v), axis=1)


# --- numba path -------------------------------------------------------------

if USE_NUMBA:
    njit = numba.njit(cache=True, nogil=True)

    @njit
    def move_numba(x, target, r1, r2, r3, r4, r_flight, fl, sine_cut, cosine_cut, signed):
        n, d = x.shape
        out = np.empty_like(x)
        for i in range(n):
            if r4[i] < sine_cut:
                for k in range(d):
                    out[i, k] = x[i, k] + r1[i] * np.sin(r2[i, k]) * abs(r3[i, k] * target[i, k] - x[i, k])
            elif r4[i] < cosine_cut:
                for k in range(d):
                    out[i, k] = x[i, k] + r1[i] * np.cos(r2[i, k]) * abs(r3[i, k] * target[i, k] - x[i, k])
            else:
                step = r_flight[i] * fl
                for k in range(d):
                    diff = target[i, k] - x[i, k]
                    if not signed:
                        diff = abs(diff)
                    out[i, k] = x[i, k] + step * diff
        return out

    @njit
    def sphere_numba(x):
        n, d = x.shape
        out = np.zeros(n)
        for i in range(n):
            for k in range(d):
                out[i] += x[i, k] * x[i, k]
        return out

    @njit
    def schwefel_2_22_numba(x):
        n, d = x.shape
        out = np.empty(n)
        for i in range(n):
            s = 0.0
            p = 1.0
            for k in range(d):
                a = abs(x[i, k])
                s += a
                p *= a
            out[i] = s + p
        return out

    @njit
    def schwefel_1_2_numba(x):
        n, d = x.shape
        out = np.zeros(n)
        for i in range(n):
            c = 0.0
            for k in range(d):
                c += x[i, k]
                out[i] += c * c
        return out

    @njit
    def schwefel_2_21_numba(x):
        n, d = x.shape
        out = np.zeros(n)
        for i in range(n):
            m = 0.0
            for k in range(d):
                a = abs(x[i, k])
                if a > m:
                    m = a
            out[i] = m
        return out

    @njit
    def rosenbrock_numba(x):
        n, d = x.shape
        out = np.zeros(n)
        for i in range(n):
            for k in range(d - 1):
                t = x[i, k + 1] - x[i, k] * x[i, k]
                u = x[i, k] - 1.0
                out[i] += 100.0 * t * t + u * u
        return out

    @njit
    def step_numba(x):
        n, d = x.shape
        out = np.zeros(n)
        for i in range(n):
            for k in range(d):
                s = np.floor(x[i, k] + 0.5)
                out[i] += s * s
        return out

    @njit
    def quartic_numba(x):
        n, d = x.shape
        out = np.zeros(n)
        for i in range(n):
            for k in range(d):
                v = x[i, k] * x[i, k]
                out[i] += (k + 1) * (v * v)
        return out

    move = move_numba
    sphere = sphere_numba
    schwefel_2_22 = schwefel_2_22_numba
    schwefel_1_2 = schwefel_1_2_numba
    schwefel_2_21 = schwefel_2_21_numba
    rosenbrock = rosenbrock_numba
    step = step_numba
    quartic = quartic_numba
else:
    move = move_numpy
    sphere = sphere_numpy
    schwefel_2_22 = schwefel_2_22_numpy
    schwefel_1_2 = schwefel_1_2_numpy
    schwefel_2_21 = schwefel_2_21_numpy
    rosenbrock = rosenbrock_numpy
    step = step_numpy
    quartic = quartic_numpy
