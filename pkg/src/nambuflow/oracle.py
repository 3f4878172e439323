"""Brute-force validators: finite discretized baths and exact Fock algebra.

Nothing here shares evaluation machinery with the production path: the bath
benchmark evolves the full system+reservoir Hamiltonian unitarily and traces
out the bath, and the Fock helpers build operators on the 2^n many-body
space directly.  Agreement with the kernel-based evolution is therefore a
genuine end-to-end check of the wide-band master equation, valid for times
well below the finite bath's recurrence time 2 pi L / W.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import QuadraticModel
from .models import charge_matrix
from .nambu import build_hamiltonian, mode_count

__all__ = [
    "closed_evolve",
    "DiscretizedBath",
    "assemble_composite",
    "BathBenchmark",
    "bath_benchmark",
    "fermion_operators",
    "nambu_operators",
    "many_body_bilinear",
    "fock_thermal_state",
    "fock_correlation_matrix",
    "log_generating_det",
]

MAX_COMPOSITE_MODES = 2000


def closed_evolve(hamiltonian: np.ndarray, chi0: np.ndarray, t: float,
                  decomposition=None) -> np.ndarray:
    """chi(t) = U chi(0) U^dag for a closed quadratic system, U = e^{-iHt}."""
    if decomposition is None:
        decomposition = np.linalg.eigh(np.asarray(hamiltonian, dtype=complex))
    w, v = decomposition
    phase = np.exp(-1j * w * t)
    u = (v * phase[None, :]) @ v.conj().T
    return u @ np.asarray(chi0, dtype=complex) @ u.conj().T


@dataclass(frozen=True)
class DiscretizedBath:
    """Uniformly spaced bath levels over [-W/2, W/2] with flat couplings.

    l_modes levels at spacing W/L; a contact of strength rate couples to
    each level with amplitude sqrt(rate W / (pi L)), reproducing the flat
    hybridization pi * dos * |coupling|^2 = rate.
    """

    l_modes: int
    bandwidth: float

    def __post_init__(self):
        if self.l_modes < 1 or self.bandwidth <= 0:
            raise ValueError("need l_modes >= 1 and bandwidth > 0")

    def levels(self) -> np.ndarray:
        l, w = self.l_modes, self.bandwidth
        return -w / 2 + (np.arange(l) + 0.5) * w / l

    def coupling(self, rate: float) -> float:
        return float(np.sqrt(rate * self.bandwidth
                             / (np.pi * self.l_modes)))

    @property
    def recurrence_time(self) -> float:
        return 2 * np.pi * self.l_modes / self.bandwidth


def _fermi(eps: np.ndarray, beta: float, mu: float) -> np.ndarray:
    if beta == 0.0:
        return np.full_like(eps, 0.5)
    if np.isinf(beta):
        return np.where(eps < mu, 1.0, np.where(eps > mu, 0.0, 0.5))
    from scipy.special import expit
    return expit(-beta * (eps - mu))


def assemble_composite(model: QuadraticModel, chi0_sys: np.ndarray,
                       bath: DiscretizedBath):
    """System ⊕ discretized reservoirs: total Hamiltonian and initial chi.

    Each PSD hybridization is split into rank-1 channels (eigenvectors of
    its particle block); every channel gets its own copy of the bath,
    thermally occupied at that reservoir's (beta, mu).  Returns
    (h_total, chi0_total, system Nambu indices).
    """
    n = model.n
    chi0_sys = np.asarray(chi0_sys, dtype=complex)
    if mode_count(chi0_sys) != n:
        raise ValueError("chi0 dimension does not match the model")
    channels = []
    for res in model.reservoirs:
        gp = res.gamma[:n, :n]
        vals, vecs = np.linalg.eigh(0.5 * (gp + gp.conj().T))
        scale = max(float(vals.max(initial=0.0)), 1.0)
        for a in range(len(vals)):
            if vals[a] > 1e-12 * scale:
                channels.append((float(vals[a]), vecs[:, a], res))
    l = bath.l_modes
    n_tot = n + l * len(channels)
    if n_tot > MAX_COMPOSITE_MODES:
        raise ValueError(
            f"composite size {n_tot} exceeds cap {MAX_COMPOSITE_MODES}")
    eps = bath.levels()
    h = np.zeros((n_tot, n_tot), dtype=complex)
    h[:n, :n] = model.hamiltonian[:n, :n]
    delta = np.zeros((n_tot, n_tot), dtype=complex)
    delta[:n, :n] = model.hamiltonian[:n, n:]
    occ = np.empty(n_tot - n)
    for c, (rate, u, res) in enumerate(channels):
        sl = slice(n + c * l, n + (c + 1) * l)
        h[sl, sl] = np.diag(eps)
        h[:n, sl] = bath.coupling(rate) * u[:, None]
        h[sl, :n] = h[:n, sl].conj().T
        occ[c * l:(c + 1) * l] = _fermi(eps, res.beta, res.mu)
    h_tot = build_hamiltonian(h, delta)
    chi0 = np.zeros((2 * n_tot, 2 * n_tot), dtype=complex)
    sys_idx = np.r_[0:n, n_tot:n_tot + n]
    chi0[np.ix_(sys_idx, sys_idx)] = chi0_sys
    bidx = np.arange(n, n_tot)
    chi0[bidx, bidx] = 1.0 - occ
    chi0[n_tot + bidx, n_tot + bidx] = occ
    return h_tot, chi0, sys_idx


@dataclass
class BathBenchmark:
    times: np.ndarray
    chi_sys: np.ndarray
    recurrence_time: float


def bath_benchmark(model: QuadraticModel, chi0_sys: np.ndarray,
                   bath: DiscretizedBath, times) -> BathBenchmark:
    """Exact system chi(t) from the closed system+bath evolution.

    Diagonalizes the composite once; each output time costs two slim
    matrix products.  Warns when the grid crosses half the recurrence time,
    past which the finite bath feeds spurious echoes back.
    """
    times = np.asarray(times, dtype=float)
    h_tot, chi0, sys_idx = assemble_composite(model, chi0_sys, bath)
    if times.max(initial=0.0) > 0.5 * bath.recurrence_time:
        warnings.warn(
            f"t_max {times.max():.3g} exceeds half the bath recurrence time "
            f"{bath.recurrence_time:.3g}; expect finite-size echoes",
            stacklevel=2)
    w, v = np.linalg.eigh(h_tot)
    a = v[sys_idx, :]
    b = v.conj().T @ chi0 @ v
    out = np.empty((len(times), len(sys_idx), len(sys_idx)), dtype=complex)
    for i, t in enumerate(times):
        ap = a * np.exp(-1j * w * t)[None, :]
        out[i] = ap @ b @ ap.conj().T
    return BathBenchmark(times=times, chi_sys=out,
                         recurrence_time=bath.recurrence_time)


# ---------------------------------------------------------------------------
# Exact Fock-space helpers (small n only)


def fermion_operators(n: int) -> list[np.ndarray]:
    """Annihilation operators on the 2^n Fock space (Jordan-Wigner strings)."""
    if n > 12:
        raise ValueError("Fock-space helpers are for small n")
    sz = np.diag([1.0, -1.0])
    low = np.zeros((2, 2))
    low[0, 1] = 1.0  # <empty|c|occupied> = 1
    eye = np.eye(2)
    ops = []
    for j in range(n):
        mats = [sz] * j + [low] + [eye] * (n - j - 1)
        full = mats[0]
        for m in mats[1:]:
            full = np.kron(full, m)
        ops.append(full)
    return ops


def nambu_operators(n: int) -> list[np.ndarray]:
    """C = (c_1..c_n, c_1^dag..c_n^dag) as Fock matrices."""
    cs = fermion_operators(n)
    return cs + [c.conj().T for c in cs]


def many_body_bilinear(a: np.ndarray,
                       ops: list[np.ndarray] | None = None) -> np.ndarray:
    """(1/2) C^dag A C as a dense Fock-space matrix."""
    a = np.asarray(a, dtype=complex)
    n = mode_count(a)
    if ops is None:
        ops = nambu_operators(n)
    dim = ops[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(2 * n):
        for j in range(2 * n):
            if a[i, j] != 0:
                out += 0.5 * a[i, j] * (ops[i].conj().T @ ops[j])
    return out


def fock_thermal_state(hamiltonian: np.ndarray, beta: float,
                       mu: float = 0.0) -> np.ndarray:
    """rho ∝ exp(-beta ((1/2) C^dag (H - mu Q) C)) for finite beta."""
    ham = np.asarray(hamiltonian, dtype=complex)
    n = mode_count(ham)
    if not np.isfinite(beta):
        raise ValueError("use finite beta for the Fock thermal oracle")
    hmat = many_body_bilinear(ham - mu * charge_matrix(n))
    rho = expm(-beta * hmat)
    return rho / np.trace(rho).real


def fock_correlation_matrix(rho: np.ndarray, n: int) -> np.ndarray:
    """chi_ab = tr(rho C_a C_b^dag) from an exact many-body state."""
    ops = nambu_operators(n)
    chi = np.empty((2 * n, 2 * n), dtype=complex)
    for a in range(2 * n):
        for b in range(2 * n):
            chi[a, b] = np.trace(rho @ ops[a] @ ops[b].conj().T)
    return chi


def log_generating_det(chi: np.ndarray, o1: np.ndarray, o2: np.ndarray,
                       z1: complex, z2: complex) -> complex:
    """ln sqrt det{chi + e^{z1 O1} e^{z2 O2} (1 - chi)}.

    Second mixed derivative at z = 0 equals (1/2) tr{O1 chi O2 (1-chi)}; used
    as a finite-difference oracle for the correlator trace formula.
    """
    chi = np.asarray(chi, dtype=complex)
    dim = chi.shape[0]
    f = chi + expm(z1 * np.asarray(o1, dtype=complex)) \
        @ expm(z2 * np.asarray(o2, dtype=complex)) @ (np.eye(dim) - chi)
    sign, logabs = np.linalg.slogdet(f)
    return 0.5 * (logabs + np.log(sign))
