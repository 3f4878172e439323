"""Long-time noise matrix and steady-state correlation matrix.

For decaying modes (Im lambda < 0) the memory kernel has a clean t -> inf
limit: Gamma(0, i w t) dies, log(i w t) = log(i w) + log t, and the real
scalar log(t)/pi cancels identically inside the noise bracket
-i[A G - G A^dag + ...], leaving the reduced per-mode kernel

    R~(w) = s[beta w, inf] + [log(i w) + gamma_E + log(4/pi)] / pi .

The steady correlation matrix then solves -i(K chi - chi K^dag) + N_inf = 0,
solved entrywise in the eigenbasis of K:

    chi_inf = V [ -i W / (lambda_a - conj(lambda_b)) ] V^dag ,
    W = V^-1 N_inf V^-dag .

Modes whose left eigenvector decouples from every hybridization ("dark"
modes) are undamped and keep memory of the initial state, so a steady state
exists only when every mode either decays or is dark; chi_inf itself
additionally requires all pair gaps to be resolvable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import QuadraticModel
from .errors import (
    IllConditionedSteadyStateError,
    NoSteadyStateError,
    NumericalError,
)
from .kernels import EULER_GAMMA, LOG_4_OVER_PI, kernel_s_infinity
from .nambu import validate_correlation

__all__ = [
    "reduced_kernel",
    "noise_matrix_infinity",
    "SteadyStateResult",
    "steady_chi",
]


def reduced_kernel(omega, beta_kernel: float):
    """R~(w): the t -> inf memory kernel up to the cancelling log(t)/pi shift.

    Requires Im w < 0 (decaying mode frequencies, possibly shifted by mu).
    beta_kernel = inf drops the thermal part.
    """
    omega = np.asarray(omega, dtype=complex)
    if np.any(omega.imag >= 0):
        raise ValueError("reduced kernel needs strictly decaying frequencies")
    val = (np.log(1j * omega) + EULER_GAMMA + LOG_4_OVER_PI) / np.pi
    if np.isfinite(beta_kernel):
        val = val + kernel_s_infinity(beta_kernel * omega)
    return val


def _dark_modes(model: QuadraticModel, dark_tol: float = 1e-12) -> np.ndarray:
    """Boolean mask of modes whose left eigenvector kills Gamma entirely.

    Since every Gamma_nu (and its hat) is PSD, a row annihilating the total
    annihilates each summand, so the total is the exact coupling test.
    """
    modes = model.k_modes
    g = model.gamma_total
    gnorm = float(np.linalg.norm(g, 2))
    if gnorm == 0.0:
        return np.ones(len(modes.values), dtype=bool)
    c = np.linalg.norm(modes.left @ g, axis=1)
    c /= np.linalg.norm(modes.left, axis=1) * gnorm
    return c < dark_tol


def noise_matrix_infinity(model: QuadraticModel, gap_eps: float = 1e-8,
                          dark_tol: float = 1e-12) -> np.ndarray:
    """N(t -> inf) through the reduced kernel.

    Raises NoSteadyStateError if a mode that couples to any reservoir fails
    to decay faster than gap_eps.  Dark modes contribute nothing and are
    skipped (their diverging log never enters).
    """
    modes = model.k_modes
    w = modes.values
    dark = _dark_modes(model, dark_tol)
    slow = -w.imag <= gap_eps
    if np.any(slow & ~dark):
        worst = float(np.min(-w.imag[slow & ~dark]))
        raise NoSteadyStateError(
            f"coupled mode decays at rate {worst:.3e} <= {gap_eps:.1e}; "
            "long-time noise matrix does not converge")
    act = ~dark
    out = np.zeros((2 * model.n, 2 * model.n), dtype=complex)
    for res in model.reservoirs:
        g, gh = res.gamma, res.gamma_hat
        out += g + gh
        if res.beta == 0.0:
            continue
        bk = res.beta_kernel
        rp = np.zeros_like(w)
        rm = np.zeros_like(w)
        rp[act] = reduced_kernel(w[act] + res.mu, bk)
        rm[act] = reduced_kernel(w[act] - res.mu, bk)
        a_p = (modes.right * rp[None, :]) @ modes.left
        a_m = (modes.right * rm[None, :]) @ modes.left
        # -mu shift with the particle block, +mu with the hole block
        out -= 1j * (a_m @ g - g @ a_m.conj().T
                     + a_p @ gh - gh @ a_p.conj().T)
    return out


@dataclass
class SteadyStateResult:
    chi: np.ndarray
    noise: np.ndarray
    min_gap: float
    residual: float


def steady_chi(model: QuadraticModel, gap_threshold: float = 1e-10,
               residual_tol: float = 1e-7,
               validate_tol: float = 1e-6) -> SteadyStateResult:
    """Steady-state correlation matrix via the eigenbasis division.

    Raises IllConditionedSteadyStateError when some eigenvalue pair gap
    |lambda_a - conj(lambda_b)| falls below gap_threshold (this includes any
    undamped mode through its diagonal pair), and NumericalError if the
    assembled chi fails the fixed-point residual or its kinematic invariants.
    """
    n_inf = noise_matrix_infinity(model)
    modes = model.k_modes
    w = modes.values
    denom = w[:, None] - w.conj()[None, :]
    min_gap = float(np.min(np.abs(denom)))
    if min_gap < gap_threshold:
        raise IllConditionedSteadyStateError(
            f"eigenvalue pair gap {min_gap:.3e} below {gap_threshold:.1e}; "
            "steady state not resolvable in the spectral formula",
            min_gap=min_gap)
    wtil = modes.left @ n_inf @ modes.left.conj().T
    chi = modes.right @ (-1j * wtil / denom) @ modes.right.conj().T
    k = model.k_matrix
    res_mat = -1j * (k @ chi - chi @ k.conj().T) + n_inf
    scale = max(float(np.linalg.norm(n_inf, np.inf)), 1e-300)
    residual = float(np.linalg.norm(res_mat, np.inf)) / scale
    if residual > residual_tol:
        raise NumericalError(
            f"steady-state fixed-point residual {residual:.3e} exceeds "
            f"{residual_tol:.1e}")
    validate_correlation(chi, atol=validate_tol)
    return SteadyStateResult(chi=chi, noise=n_inf, min_gap=min_gap,
                             residual=residual)
