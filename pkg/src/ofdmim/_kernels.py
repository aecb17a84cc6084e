"""
Exhaustive ML detection kernels.

Two implementations with identical floating-point operation order: a numba
``@njit`` loop and a chunked numpy broadcast.  The numba path is used when
numba imports and ``OFDMIM_DISABLE_NUMBA`` is unset (or "0").

All arrays are split into real/imaginary float64 parts so both paths run
the same scalar multiply/add sequence; complex multiplication is not left to
the backend.
"""

import os

import numpy as np

_DISABLED = os.environ.get("OFDMIM_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by OFDMIM_DISABLE_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

# (trials x candidates) cells per numpy sub-batch
_NUMPY_CELLS = 1 << 20


def ml_detect_numpy(cr, ci, tx, hr, hi, wr, wi, scale):
    """
    Detect each trial's block by minimum Euclidean metric over all codewords.

    Parameters
    ----------
    cr, ci : (X, N) float64
        Real and imaginary parts of the codebook.
    tx : (T,) int64
        Transmitted ordinals.
    hr, hi, wr, wi : (T, N) float64
        Channel and noise, real and imaginary parts.
    scale : float
        sqrt(rho / K).

    Returns
    -------
    (T,) int64 detected ordinals; ties go to the lowest ordinal.
    """
    T, N = hr.shape
    X = cr.shape[0]
    out = np.empty(T, dtype=np.int64)
    step = max(1, _NUMPY_CELLS // X)
    for s in range(0, T, step):
        e = min(T, s + step)
        shr = scale * hr[s:e]
        shi = scale * hi[s:e]
        xr = cr[tx[s:e]]
        xi = ci[tx[s:e]]
        yr = (shr * xr - shi * xi) + wr[s:e]
        yi = (shr * xi + shi * xr) + wi[s:e]
        metric = np.zeros((e - s, X))
        for n in range(N):
            pr = shr[:, n, None] * cr[None, :, n] - shi[:, n, None] * ci[None, :, n]
            pi = shr[:, n, None] * ci[None, :, n] + shi[:, n, None] * cr[None, :, n]
            dr = yr[:, n, None] - pr
            di = yi[:, n, None] - pi
            metric += dr * dr + di * di
        out[s:e] = np.argmin(metric, axis=1)
    return out


if HAS_NUMBA:
    @njit(cache=True, nogil=True)
    def ml_detect_numba(cr, ci, tx, hr, hi, wr, wi, scale):
        T, N = hr.shape
        X = cr.shape[0]
        out = np.empty(T, dtype=np.int64)
        yr = np.empty(N)
        yi = np.empty(N)
        shr = np.empty(N)
        shi = np.empty(N)
        for t in range(T):
            x = tx[t]
            for n in range(N):
                shr[n] = scale * hr[t, n]
                shi[n] = scale * hi[t, n]
                yr[n] = (shr[n] * cr[x, n] - shi[n] * ci[x, n]) + wr[t, n]
                yi[n] = (shr[n] * ci[x, n] + shi[n] * cr[x, n]) + wi[t, n]
            best = 0
            best_metric = np.inf
            for c in range(X):
                m = 0.0
                for n in range(N):
                    pr = shr[n] * cr[c, n] - shi[n] * ci[c, n]
                    pi = shr[n] * ci[c, n] + shi[n] * cr[c, n]
                    dr = yr[n] - pr
                    di = yi[n] - pi
                    m += dr * dr + di * di
                if m < best_metric:
                    best_metric = m
                    best = c
            out[t] = best
        return out
else:
    ml_detect_numba = None


def available_backends():
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


def get_detector(backend="auto"):
    if backend == "auto":
        backend = "numba" if HAS_NUMBA else "numpy"
    if backend == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable or disabled")
        return ml_detect_numba
    if backend == "numpy":
        return ml_detect_numpy
    raise ValueError(f"unknown backend {backend!r}")
