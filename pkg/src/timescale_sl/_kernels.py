"""Compiled inner loops.

The classical equation y'' = (q - lambda) y is written as the first-order
system y' = p, p' = (q - lambda) y and advanced with the classical
4th-order Runge-Kutta scheme on a caller-supplied mesh.
"""
import math

import numpy as np
from numba import njit

RESCALE_AT = 1e100


@njit(cache=True)
def rk4_linear(qs, hs, lam, y, p, log_scale, rec_idx):
    """Integrate one interval.

    qs      : q at mesh points and midpoints, interleaved, length 2*N + 1
    hs      : N step sizes
    rec_idx : sorted mesh indices (0..N) at which (y, p) is recorded

    Returns (ys, ps, y, p, log_scale, ok). When |y| or |p| exceeds 1e100 the
    state and everything recorded so far are divided by that magnitude and
    the logarithm of the factor is added to ``log_scale``.
    """
    n = hs.shape[0]
    nrec = rec_idx.shape[0]
    ys = np.empty(nrec)
    ps = np.empty(nrec)
    j = 0
    for k in range(n + 1):
        if j < nrec and rec_idx[j] == k:
            ys[j] = y
            ps[j] = p
            j += 1
        if k == n:
            break
        h = hs[k]
        g0 = qs[2 * k] - lam
        gm = qs[2 * k + 1] - lam
        g1 = qs[2 * k + 2] - lam
        k1y = p
        k1p = g0 * y
        k2y = p + 0.5 * h * k1p
        k2p = gm * (y + 0.5 * h * k1y)
        k3y = p + 0.5 * h * k2p
        k3p = gm * (y + 0.5 * h * k2y)
        k4y = p + h * k3p
        k4p = g1 * (y + h * k3y)
        y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        p = p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        m = max(abs(y), abs(p))
        if not math.isfinite(m):
            return ys, ps, y, p, log_scale, False
        if m > RESCALE_AT:
            y /= m
            p /= m
            for i in range(j):
                ys[i] /= m
                ps[i] /= m
            log_scale += math.log(m)
    return ys, ps, y, p, log_scale, True
