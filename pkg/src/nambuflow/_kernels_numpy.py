"""Pure-numpy fallback for the finite-time s-kernel quadrature.

Same panel rule and acceptance logic as the numba backend, but organized
breadth-first so each refinement sweep is one vectorized evaluation over all
outstanding panels.  Values agree with the numba path to quadrature tolerance
(panel decisions may differ in the last bits, not bitwise).
"""

import numpy as np

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


def _weight_arr(u):
    x = 0.5 * np.pi * u
    small = x < X_TAYLOR
    xs = np.where(small, x, 1.0)
    x2 = xs * xs
    taylor = xs * (-1.0 / 12.0 + x2 * (7.0 / 720.0 + x2 * (-31.0 / 30240.0
                   + x2 * (127.0 / 1209600.0 - x2 * 73.0 / 6842880.0))))
    xl = np.where(small, 1.0, x)
    direct = 0.5 / np.sinh(xl) - 1.0 / (np.pi * np.where(small, 1.0, u))
    return np.where(small, taylor, direct)


def _panels(z, a, b):
    """GK15 values and error estimates on a batch of panels [a_i, b_i]."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    u = c[:, None] + h[:, None] * GK15_NODES[None, :]
    f = np.exp(-1j * z * u) * _weight_arr(u)
    ik = h * (f @ GK15_WEIGHTS)
    ig = h * (f[:, 1::2] @ G7_WEIGHTS)
    return ik, np.abs(ik - ig)


def _s_single(z, tau, rtol, atol, max_evals):
    if tau <= 1e-12:
        return 0.0 + 0.0j, 0.0, STATUS_OK
    h0 = min(1.0, tau)
    if abs(z.real) > 0.0:
        h0 = min(h0, 2.0 * np.pi / abs(z.real) / PANELS_PER_PERIOD)
    nseg = min(int(np.ceil(tau / h0)), MAX_INITIAL_PANELS)
    edges = np.linspace(0.0, tau, nseg + 1)
    a = edges[:-1].copy()
    b = edges[1:].copy()
    depth = np.zeros(nseg, dtype=np.int64)
    acc = 0.0 + 0.0j
    err = 0.0
    evals = 0
    while a.size:
        ik, e = _panels(z, a, b)
        evals += 15 * a.size
        scale = abs(acc + ik.sum())
        tol_seg = max(atol, rtol * scale) * (b - a) / tau
        done = (e <= tol_seg) | (depth >= MAX_SEGMENT_DEPTH)
        if evals >= max_evals:
            done[:] = True
        acc += ik[done].sum()
        err += e[done].sum()
        a, b, depth = a[~done], b[~done], depth[~done]
        if a.size:
            # split every remaining panel at its midpoint
            m = 0.5 * (a + b)
            a, b = np.concatenate([a, m]), np.concatenate([m, b])
            depth = np.concatenate([depth + 1, depth + 1])
    val = -acc
    tol_glob = max(atol, rtol * abs(val))
    status = STATUS_OK if err <= 8.0 * tol_glob else STATUS_NOT_CONVERGED
    return val, err, status


def s_finite_batch(zs, tau, rtol, atol, max_evals):
    zs = np.asarray(zs, dtype=complex)
    vals = np.empty(zs.shape, dtype=complex)
    errs = np.empty(zs.shape)
    stats = np.empty(zs.shape, dtype=np.int64)
    for i, z in enumerate(zs):
        vals[i], errs[i], stats[i] = _s_single(complex(z), tau, rtol, atol,
                                               max_evals)
    return vals, errs, stats
