"""Scalar memory kernels and spectral matrix functions.

The wide-band reservoir memory enters through two scalar kernels,

    r[x]      = [log(ix) + Gamma(0, ix) + gamma_E + log(4/pi)] / pi ,
    s[z, tau] = -int_0^tau du e^{-i z u} w(u) ,
    w(u)      = 1/(2 sinh(pi u/2)) - 1/(pi u) ,

combined as R[omega, beta, t] = s[beta omega, t/beta] + r[omega t].  Both are
boundary values of entire/analytic functions: r is evaluated through the
entire function Ein(ix) = log(ix) + Gamma(0, ix) + gamma_E, so r[0] =
log(4/pi)/pi is finite, and s(z, .) extends to tau = infinity for Im z < 0
with the closed form [psi(1/2 + iz/pi) - log(iz/pi)]/pi.

Evaluation strategy (each branch cross-checked against the others in tests):
  r: power series of Ein for |x| <= 8, the exp1 route for moderate |x|, and
     the divergent asymptotic expansion of Gamma(0, ix) beyond |x| = 35.
     The power series in double precision loses ~e^{|x|} eps to cancellation,
     so it is never used where that exceeds ~1e-13.
  s: adaptive Gauss-Kronrod panels (numba or numpy backend) for tau < 30,
     psi closed form plus an E1 tail correction for tau >= 30, the psi form
     alone at tau = infinity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import digamma, exp1

from . import _backend
from ._kernels_common import STATUS_OK, TAU_CLOSED
from .errors import NearDefectiveError, QuadratureError

__all__ = [
    "EULER_GAMMA",
    "LOG_4_OVER_PI",
    "KernelParams",
    "memory_weight",
    "kernel_r",
    "kernel_r_series",
    "kernel_r_asymptotic",
    "kernel_s",
    "kernel_s_batch",
    "kernel_s_infinity",
    "kernel_s_zero_freq",
    "kernel_R",
    "SpectralDecomposition",
    "spectral_decomposition",
    "matrix_function",
]

EULER_GAMMA = 0.5772156649015328606
LOG_4_OVER_PI = float(np.log(4.0 / np.pi))

_R_SERIES_CUT = 8.0
_R_ASYM_CUT = 35.0


def kernel_r_series(x, nmax: int = 60):
    """r[x] from the entire-series form of Ein(ix).

    Exact at x = 0; cancellation grows like e^{|x|} eps, so keep |x| small.
    """
    x = np.asarray(x, dtype=complex)
    z = 1j * x
    term = np.ones_like(z)
    acc = np.zeros_like(z)
    for k in range(1, nmax + 1):
        term = term * (-z) / k
        acc = acc - term / k
    return (acc + LOG_4_OVER_PI) / np.pi


def kernel_r_asymptotic(x, nterms: int = 14):
    """r[x] with Gamma(0, ix) ~ e^{-ix}/(ix) (1 - 1/(ix) + 2/(ix)^2 - ...)."""
    x = np.asarray(x, dtype=complex)
    z = 1j * x
    term = np.ones_like(z)
    acc = np.ones_like(z)
    for k in range(1, nterms):
        term = term * (-k) / z
        acc = acc + term
    g0 = np.exp(-z) / z * acc
    return (np.log(z) + g0 + EULER_GAMMA + LOG_4_OVER_PI) / np.pi


def _kernel_r_exp1(x):
    z = 1j * np.asarray(x, dtype=complex)
    return (np.log(z) + exp1(z) + EULER_GAMMA + LOG_4_OVER_PI) / np.pi


def kernel_r(x):
    """Memory kernel r[x], scalar or array, for Im x <= 0 (and the real axis).

    Branch layout: series below |x| = 8, exp1 route to |x| = 35, asymptotic
    expansion beyond.  Adjacent branches agree to ~1e-12 on their crossover
    shells; the consistency is pinned in the test suite.
    """
    x = np.asarray(x, dtype=complex)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any((x.real == 0.0) & (x.imag > 0.0)):
        raise ValueError("r is evaluated on a branch cut for x on the "
                         "positive imaginary axis")
    ax = np.abs(x)
    out = np.empty_like(x)
    small = ax <= _R_SERIES_CUT
    large = ax > _R_ASYM_CUT
    mid = ~small & ~large
    if np.any(small):
        out[small] = kernel_r_series(x[small])
    if np.any(mid):
        out[mid] = _kernel_r_exp1(x[mid])
    if np.any(large):
        out[large] = kernel_r_asymptotic(x[large])
    return out[0] if scalar else out


def memory_weight(u):
    """Integrand weight w(u) = 1/(2 sinh(pi u/2)) - 1/(pi u) of the s kernel.

    Entire continuation at u = 0 (value 0); safe against sinh overflow at
    large u, where w(u) -> -1/(pi u).
    """
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    x = 0.5 * np.pi * u
    out = np.empty_like(u)
    small = x < 0.25
    xs = x[small]
    x2 = xs * xs
    out[small] = xs * (-1.0 / 12.0 + x2 * (7.0 / 720.0 + x2 * (-31.0 / 30240.0
                       + x2 * (127.0 / 1209600.0 - x2 * 73.0 / 6842880.0))))
    xl = x[~small]
    csch = np.where(xl > 300.0, 0.0, 0.5 / np.sinh(np.minimum(xl, 300.0)))
    out[~small] = csch - 1.0 / (np.pi * u[~small])
    return out[0] if scalar else out


def kernel_s_infinity(z):
    """s[z, infinity] = [psi(1/2 + iz/pi) - log(iz/pi)]/pi.

    Finite for Im z < 0 and for real z != 0; diverges logarithmically at
    z = 0 (raises).
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z == 0):
        raise ValueError("s[z, inf] diverges at z = 0")
    if np.any(z.imag > 1e-8 * np.maximum(1.0, np.abs(z))):
        raise ValueError("s[z, inf] requires Im z <= 0")
    q = 1j * z / np.pi
    out = (digamma(0.5 + q) - np.log(q)) / np.pi
    return out[0] if scalar else out


def kernel_s_zero_freq(tau: float) -> complex:
    """s[0, tau] = -(1/pi) log(4 tanh(pi tau/4) / (pi tau)) for finite tau."""
    if tau <= 0:
        return 0.0 + 0.0j
    if not np.isfinite(tau):
        raise ValueError("s[0, inf] diverges")
    if tau < 1e-8:
        # log(tanh(x)/x) = -x^2/3 + O(x^4) with x = pi tau / 4
        return complex((np.pi * tau / 4) ** 2 / (3 * np.pi))
    return complex(-(np.log(4 * np.tanh(np.pi * tau / 4) / (np.pi * tau))) / np.pi)


def kernel_s_batch(zs, tau: float, rtol: float = 1e-10, atol: float = 1e-13,
                   max_evals: int = 2_000_000):
    """Vectorized s[z, tau] over an array of frequencies z.

    tau = inf uses the psi closed form; tau >= 30 the closed form plus the
    E1 tail; smaller tau the adaptive quadrature backend.  Raises
    QuadratureError (with the achieved estimate) on non-convergence.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    if tau < 0:
        raise ValueError("tau must be non-negative")
    out = np.empty_like(zs)
    tiny = np.abs(zs) < 1e-14
    if np.isinf(tau):
        if np.any(tiny):
            raise ValueError("s[z, inf] diverges at z = 0")
        return kernel_s_infinity(zs)
    if np.any(tiny):
        out[tiny] = kernel_s_zero_freq(tau)
    rest = ~tiny
    if not np.any(rest):
        return out
    z = zs[rest]
    if tau >= TAU_CLOSED:
        if np.any((z.real == 0.0) & (z.imag > 0.0)):
            raise ValueError("s closed form hits a branch cut for z on the "
                             "positive imaginary axis")
        out[rest] = kernel_s_infinity(z) - exp1(1j * z * tau) / np.pi
        return out
    vals, errs, stats = _backend.s_finite_batch(
        np.ascontiguousarray(z), float(tau), float(rtol), float(atol),
        int(max_evals))
    if np.any(stats != STATUS_OK):
        worst = float(np.max(errs[stats != STATUS_OK]))
        raise QuadratureError(
            f"s-kernel quadrature did not converge (worst estimate {worst:.3e}"
            f" at tau={tau})", achieved=worst)
    out[rest] = vals
    return out


def kernel_s(z, tau: float, **kw) -> complex:
    """Scalar s[z, tau]; see kernel_s_batch."""
    return complex(kernel_s_batch(np.asarray([z], dtype=complex), tau, **kw)[0])


@dataclass(frozen=True)
class KernelParams:
    """Inverse temperature and elapsed time entering the memory kernel R.

    beta is the kernel-convention inverse temperature (the dynamics layer
    maps a physical inverse temperature to beta/2 before building these).
    beta = inf means zero temperature (s drops out); beta = 0 is refused
    here because r and s are individually singular in that limit and the
    infinite-temperature noise is short-circuited upstream.  Chemical
    potentials enter as shifts of the frequency argument, not here.
    """

    beta: float
    t: float


def kernel_R(omega, params: KernelParams):
    """R[omega, beta, t] = s[beta omega, t/beta] + r[omega t]."""
    if params.t < 0:
        raise ValueError("t must be non-negative")
    if params.beta == 0:
        raise ValueError("beta = 0 is singular in R; the noise matrix "
                         "short-circuits to Gamma upstream")
    omega = np.asarray(omega, dtype=complex)
    scalar = omega.ndim == 0
    omega = np.atleast_1d(omega)
    rv = kernel_r(omega * params.t)
    if np.isinf(params.beta):
        out = rv
    else:
        out = rv + kernel_s_batch(params.beta * omega, params.t / params.beta)
    return out[0] if scalar else out


@dataclass
class SpectralDecomposition:
    """Eigendecomposition A = right @ diag(values) @ left with left = right^-1.

    Eigenvalues sorted by (Re, Im); cond is the 2-norm condition number of
    the eigenvector matrix.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    cond: float

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return (self.right * f(self.values)[None, :]) @ self.left


def spectral_decomposition(a: np.ndarray,
                           cond_threshold: float = 1e8) -> SpectralDecomposition:
    """Diagonalize a (generally non-Hermitian) matrix, deterministically ordered.

    Raises NearDefectiveError when the eigenvector condition number exceeds
    cond_threshold; the caller may retry with a perturbed matrix.
    """
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eig(a)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = v[:, order]
    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > cond_threshold:
        raise NearDefectiveError(
            f"eigenvector condition number {cond:.3e} exceeds "
            f"{cond_threshold:.1e}; matrix is near-defective", cond=cond)
    left = np.linalg.inv(v)
    return SpectralDecomposition(values=w, right=v, left=left, cond=cond)


def matrix_function(a, f: Callable[[np.ndarray], np.ndarray],
                    decomp: SpectralDecomposition | None = None) -> np.ndarray:
    """f(A) through the eigendecomposition, f acting on the eigenvalue array."""
    if decomp is None:
        decomp = spectral_decomposition(a)
    return decomp.apply(f)
