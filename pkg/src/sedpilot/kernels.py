"""Hot loops of the double-slit Monte Carlo.

Each kernel exists twice: a numba ``@njit`` version that walks one particle
at a time, and a vectorized numpy version that works on particle chunks.
:data:`sedpilot._accel.USE_NUMBA` picks the one the public wrappers call;
both are importable directly for testing and benchmarking.
"""
import math

import numpy as np

from . import _accel
from ._accel import njit


def propagator(src_y, src_w, det_y, screen_distance, k):
    """Huygens-Fresnel matrix K[i, j] = w_j exp(i k r_ij) / sqrt(r_ij)."""
    dy = det_y[:, None] - src_y[None, :]
    r = np.sqrt(screen_distance * screen_distance + dy * dy)
    return np.ascontiguousarray(src_w[None, :] * np.exp(1j * k * r) / np.sqrt(r))


# ---------------------------------------------------------------- numpy path

def incident_numpy(src_y, k, phases, sin_angles):
    """Sum of unit plane waves at each source; phases/sin_angles are (P, M)."""
    arg = phases[:, :, None] + k * sin_angles[:, :, None] * src_y[None, None, :]
    return np.exp(1j * arg).sum(axis=1)


def intensity_numpy(K, src_y, k, phases, sin_angles):
    amp = incident_numpy(src_y, k, phases, sin_angles) @ K.T
    return amp.real ** 2 + amp.imag ** 2


def inverse_cdf_numpy(density, x0, h, u):
    """Rows of ``density`` (P, N) are piecewise-linear pdfs on x0 + h*i.

    Returns one draw per row for the uniforms ``u``; rows with zero mass
    give NaN.
    """
    density = np.atleast_2d(density)
    f0 = density[:, :-1]
    f1 = density[:, 1:]
    cum = np.zeros((density.shape[0], density.shape[1]))
    np.cumsum(0.5 * h * (f0 + f1), axis=1, out=cum[:, 1:])
    total = cum[:, -1]
    target = u * total
    n_seg = density.shape[1] - 1
    seg = np.empty(density.shape[0], dtype=np.int64)
    for p in range(density.shape[0]):
        seg[p] = min(np.searchsorted(cum[p], target[p], side="right") - 1, n_seg - 1)
    rows = np.arange(density.shape[0])
    a0 = f0[rows, seg]
    a1 = f1[rows, seg]
    r = target - cum[rows, seg]
    slope = (a1 - a0) / h
    disc = np.sqrt(np.maximum(a0 * a0 + 2.0 * slope * r, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(a0 + disc > 0.0, 2.0 * r / (a0 + disc), 0.0)
    out = x0 + h * seg + np.clip(s, 0.0, h)
    out[~(total > 0.0)] = np.nan
    return out


def arrivals_numpy(K, src_y, k, phases, sin_angles, u, x0, h, chunk=256):
    out = np.empty(phases.shape[0])
    for start in range(0, phases.shape[0], chunk):
        sl = slice(start, start + chunk)
        dens = intensity_numpy(K, src_y, k, phases[sl], sin_angles[sl])
        out[sl] = inverse_cdf_numpy(dens, x0, h, u[sl])
    return out


# ---------------------------------------------------------------- numba path

@njit
def _invert_row(dens, x0, h, u):
    n = dens.shape[0]
    total = 0.0
    for i in range(n - 1):
        total += 0.5 * h * (dens[i] + dens[i + 1])
    if not total > 0.0:
        return np.nan
    target = u * total
    acc = 0.0
    for i in range(n - 1):
        area = 0.5 * h * (dens[i] + dens[i + 1])
        if acc + area > target or i == n - 2:
            r = target - acc
            a0 = dens[i]
            slope = (dens[i + 1] - a0) / h
            disc = math.sqrt(max(a0 * a0 + 2.0 * slope * r, 0.0))
            s = 2.0 * r / (a0 + disc) if a0 + disc > 0.0 else 0.0
            return x0 + h * i + min(max(s, 0.0), h)
        acc += area
    return np.nan


@njit(fastmath=True)
def _intensity_row(Kr, Ki, src_y, k, phases, sin_angles, ar, ai, out):
    n_det, n_src = Kr.shape
    for j in range(n_src):
        re = 0.0
        im = 0.0
        for m in range(phases.shape[0]):
            arg = phases[m] + k * sin_angles[m] * src_y[j]
            re += math.cos(arg)
            im += math.sin(arg)
        ar[j] = re
        ai[j] = im
    for i in range(n_det):
        re = 0.0
        im = 0.0
        for j in range(n_src):
            re += Kr[i, j] * ar[j] - Ki[i, j] * ai[j]
            im += Kr[i, j] * ai[j] + Ki[i, j] * ar[j]
        out[i] = re * re + im * im


def _split(K):
    return np.ascontiguousarray(K.real), np.ascontiguousarray(K.imag)


@njit
def _intensity_numba(Kr, Ki, src_y, k, phases, sin_angles):
    n_p = phases.shape[0]
    out = np.empty((n_p, Kr.shape[0]))
    ar = np.empty(Kr.shape[1])
    ai = np.empty(Kr.shape[1])
    for p in range(n_p):
        _intensity_row(Kr, Ki, src_y, k, phases[p], sin_angles[p], ar, ai, out[p])
    return out


@njit
def _arrivals_numba(Kr, Ki, src_y, k, phases, sin_angles, u, x0, h):
    n_p = phases.shape[0]
    out = np.empty(n_p)
    ar = np.empty(Kr.shape[1])
    ai = np.empty(Kr.shape[1])
    dens = np.empty(Kr.shape[0])
    for p in range(n_p):
        _intensity_row(Kr, Ki, src_y, k, phases[p], sin_angles[p], ar, ai, dens)
        out[p] = _invert_row(dens, x0, h, u[p])
    return out


def intensity_numba(K, src_y, k, phases, sin_angles):
    Kr, Ki = _split(K)
    return _intensity_numba(Kr, Ki, src_y, float(k), phases, sin_angles)


def arrivals_numba(K, src_y, k, phases, sin_angles, u, x0, h):
    Kr, Ki = _split(K)
    return _arrivals_numba(Kr, Ki, src_y, float(k), phases, sin_angles, u, float(x0), float(h))


@njit
def inverse_cdf_numba(density, x0, h, u):
    out = np.empty(density.shape[0])
    for p in range(density.shape[0]):
        out[p] = _invert_row(density[p], x0, h, u[p])
    return out


# ---------------------------------------------------------------- dispatch

def intensity(K, src_y, k, phases, sin_angles):
    if _accel.USE_NUMBA:
        return intensity_numba(K, src_y, k, phases, sin_angles)
    return intensity_numpy(K, src_y, k, phases, sin_angles)


def inverse_cdf(density, x0, h, u):
    density = np.ascontiguousarray(np.atleast_2d(density), dtype=float)
    u = np.ascontiguousarray(np.atleast_1d(u), dtype=float)
    if _accel.USE_NUMBA:
        return inverse_cdf_numba(density, float(x0), float(h), u)
    return inverse_cdf_numpy(density, x0, h, u)


def arrivals(K, src_y, k, phases, sin_angles, u, x0, h):
    if _accel.USE_NUMBA:
        return arrivals_numba(K, src_y, k, phases, sin_angles, u, x0, h)
    return arrivals_numpy(K, src_y, k, phases, sin_angles, u, x0, h)
