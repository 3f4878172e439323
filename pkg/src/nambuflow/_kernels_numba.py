"""numba implementation of the finite-time s-kernel quadrature.

Hot path: one adaptive Gauss-Kronrod integration per (eigenvalue, reservoir,
sign, time) tuple.  Compiled lazily with cache=True so the first call per
interpreter pays the JIT cost once.
"""

import cmath
import math

import numpy as np
from numba import njit

from ._kernels_common import (
    G7_WEIGHTS,
    GK15_NODES,
    GK15_WEIGHTS,
    MAX_INITIAL_PANELS,
    MAX_SEGMENT_DEPTH,
    PANELS_PER_PERIOD,
    STATUS_NOT_CONVERGED,
    STATUS_OK,
    X_TAYLOR,
)

_NODES = GK15_NODES.copy()
_WK = GK15_WEIGHTS.copy()
_WG = G7_WEIGHTS.copy()


@njit(cache=True)
def _weight(u):
    # 1/(2 sinh(pi u/2)) - 1/(pi u), Taylor branch near zero
    x = 1.5707963267948966 * u
    if x < X_TAYLOR:
        x2 = x * x
        return x * (-1.0 / 12.0 + x2 * (7.0 / 720.0 + x2 * (-31.0 / 30240.0
                    + x2 * (127.0 / 1209600.0 - x2 * 73.0 / 6842880.0))))
    return 0.5 / math.sinh(x) - 1.0 / (3.141592653589793 * u)


@njit(cache=True)
def _gk15_panel(z, a, b):
    """Kronrod value and |K15 - G7| error for int_a^b e^{-iz u} w(u) du."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    ik = 0.0j
    ig = 0.0j
    for m in range(15):
        u = c + h * _NODES[m]
        f = cmath.exp(-1j * z * u) * _weight(u)
        ik += _WK[m] * f
        if m % 2 == 1:
            ig += _WG[m // 2] * f
    ik *= h
    ig *= h
    return ik, abs(ik - ig)


@njit(cache=True)
def _s_single(z, tau, rtol, atol, max_evals):
    """Adaptive GK15 for s(z, tau) = -int_0^tau e^{-iz u} w(u) du."""
    if tau <= 1e-12:
        return 0.0j, 0.0, STATUS_OK
    h0 = tau if tau < 1.0 else 1.0
    absrez = abs(z.real)
    if absrez > 0.0:
        hosc = 6.283185307179586 / absrez / PANELS_PER_PERIOD
        if hosc < h0:
            h0 = hosc
    nseg = int(math.ceil(tau / h0))
    if nseg > MAX_INITIAL_PANELS:
        nseg = MAX_INITIAL_PANELS
    cap = max_evals // 15 + nseg + 4
    a_st = np.empty(cap)
    b_st = np.empty(cap)
    d_st = np.empty(cap, dtype=np.int64)
    for i in range(nseg):
        a_st[i] = tau * i / nseg
        b_st[i] = tau * (i + 1) / nseg
        d_st[i] = 0
    top = nseg
    acc = 0.0j
    err = 0.0
    evals = 0
    forced = False
    while top > 0:
        top -= 1
        a = a_st[top]
        b = b_st[top]
        d = d_st[top]
        ik, e = _gk15_panel(z, a, b)
        evals += 15
        if evals >= max_evals:
            forced = True
        scale = abs(acc + ik)
        tol_seg = (atol if atol > rtol * scale else rtol * scale) * (b - a) / tau
        if e <= tol_seg or d >= MAX_SEGMENT_DEPTH or forced or top + 2 >= cap:
            acc += ik
            err += e
        else:
            m = 0.5 * (a + b)
            a_st[top] = a
            b_st[top] = m
            d_st[top] = d + 1
            a_st[top + 1] = m
            b_st[top + 1] = b
            d_st[top + 1] = d + 1
            top += 2
    val = -acc
    tol_glob = atol if atol > rtol * abs(val) else rtol * abs(val)
    status = STATUS_OK if err <= 8.0 * tol_glob else STATUS_NOT_CONVERGED
    return val, err, status


@njit(cache=True)
def s_finite_batch(zs, tau, rtol, atol, max_evals):
    n = zs.shape[0]
    vals = np.empty(n, dtype=np.complex128)
    errs = np.empty(n)
    stats = np.empty(n, dtype=np.int64)
    for i in range(n):
        v, e, st = _s_single(zs[i], tau, rtol, atol, max_evals)
        vals[i] = v
        errs[i] = e
        stats[i] = st
    return vals, errs, stats
