"""Picard iteration for phi on [0, a1] from its Volterra integral equation.

    phi(t) = cos(s t) + (h/s) sin(s t) + (1/s) int_0^t sin(s (t - xi)) q(xi) phi(xi) dxi

with s = sqrt(lambda). The kernel is split as
sin(s t) cos(s xi) - cos(s t) sin(s xi), so each sweep needs two cumulative
integrals, taken spectrally on Chebyshev-Lobatto nodes. This shares nothing
with the Runge-Kutta shooter and serves as its oracle.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

from .domain import ProblemSpec
from .errors import ConvergenceError, DomainError, StructuralError


@lru_cache(maxsize=8)
def _cheb_operators(n: int):
    """Lobatto nodes on [-1, 1], values->coefficients map, cumulative integral at nodes."""
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    vander = C.chebvander(x, n - 1)
    to_coef = np.linalg.inv(vander)
    integ = np.column_stack([C.chebint(np.eye(n)[k], lbnd=-1.0) for k in range(n)])
    cumint = C.chebvander(x, n) @ integ @ to_coef
    return x, to_coef, integ, cumint


def phi_via_integral_equation(
    spec: ProblemSpec,
    lam: float,
    t,
    *,
    n_nodes: int | None = None,
    tol: float = 1e-13,
    max_iter: int = 500,
):
    """phi(t, lambda) on [0, a1] by Picard iteration; ``t`` may be an array."""
    if lam <= 0:
        raise StructuralError("the integral equation form needs lambda > 0")
    a1 = spec.domain.a1
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < 0) | (t_arr > a1)):
        raise DomainError(f"integral equation holds on [0, a1] = [0, {a1!r}] only")
    s = math.sqrt(lam)
    h = spec.h
    n = n_nodes or max(129, int(8 * s * a1) + 1)
    x, to_coef, integ, cumint = _cheb_operators(n)
    half = 0.5 * a1
    xi = half * (x + 1.0)
    qv = spec.q.left_values(xi)
    cs, sn = np.cos(s * xi), np.sin(s * xi)
    free = cs + h / s * sn

    phi = free.copy()
    for _ in range(max_iter):
        g = qv * phi
        new = free + (sn * (half * cumint @ (cs * g)) - cs * (half * cumint @ (sn * g))) / s
        change = np.max(np.abs(new - phi))
        phi = new
        if change <= tol * max(1.0, np.max(np.abs(phi))):
            break
    else:
        raise ConvergenceError(
            f"Picard iteration did not reach {tol:g} in {max_iter} sweeps (lambda={lam!r})"
        )

    # Nystrom evaluation of the converged equation at the requested points
    g = qv * phi
    ccos = integ @ (to_coef @ (cs * g))
    csin = integ @ (to_coef @ (sn * g))
    tt = np.atleast_1d(t_arr)
    xt = tt / half - 1.0
    st, ct = np.sin(s * tt), np.cos(s * tt)
    out = ct + h / s * st + half * (st * C.chebval(xt, ccos) - ct * C.chebval(xt, csin)) / s
    return float(out[0]) if t_arr.ndim == 0 else out
