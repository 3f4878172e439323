"""Nambu-space bookkeeping for quadratic fermion problems.

All operators act on the doubled single-particle space spanned by
C = (c_1, ..., c_n, c_1^dag, ..., c_n^dag)^T.  Flat index a in [0, n)
addresses the particle copy of orbital a, flat index n + a the hole copy.
The block swap J = sum_a |a><a_hat| + |a_hat><a| implements particle-hole
exchange; conjugation of operators is the linear map

    hat(A) = J A^T J .

Physical generators satisfy hat(H) = -H (Hamiltonians), hat(G) = G (total
hybridization) and, since hat is a transpose and not an adjoint,
hat(H - iG) = -(H - iG)^dag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NambuIndex",
    "mode_count",
    "swap_matrix",
    "ph_conjugate",
    "build_hamiltonian",
    "embed_particle_block",
    "hermiticity_defect",
    "validate_hamiltonian",
    "validate_hybridization",
    "validate_correlation",
]


@dataclass(frozen=True)
class NambuIndex:
    """Site plus sector ('p' particle, 'h' hole), mapped to a flat index."""

    site: int
    sector: str

    def __post_init__(self):
        if self.sector not in ("p", "h"):
            raise ValueError(f"sector must be 'p' or 'h', got {self.sector!r}")
        if self.site < 0:
            raise ValueError("site must be non-negative")

    def flat(self, n: int) -> int:
        if not 0 <= self.site < n:
            raise ValueError(f"site {self.site} outside [0, {n})")
        return self.site if self.sector == "p" else n + self.site

    @staticmethod
    def from_flat(i: int, n: int) -> "NambuIndex":
        if not 0 <= i < 2 * n:
            raise ValueError(f"flat index {i} outside [0, {2 * n})")
        return NambuIndex(i % n, "p" if i < n else "h")


def mode_count(a: np.ndarray) -> int:
    """Number of orbitals n for a 2n x 2n Nambu matrix, with shape checks."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] % 2:
        raise ValueError(f"Nambu dimension must be even, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a.shape[0] // 2


def swap_matrix(n: int) -> np.ndarray:
    """Particle-hole block swap J (real, symmetric, J @ J = 1)."""
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


def _ph_perm(n: int) -> np.ndarray:
    return np.r_[n : 2 * n, 0:n]


def ph_conjugate(a: np.ndarray) -> np.ndarray:
    """hat(A) = J A^T J, evaluated as an exact index permutation.

    Pure transpose plus block swap: involutive at the bit level and
    distributes as hat(AB) = hat(B) hat(A).
    """
    n = mode_count(a)
    p = _ph_perm(n)
    return a.T[np.ix_(p, p)]


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def build_hamiltonian(h: np.ndarray, delta: np.ndarray | None = None,
                      atol: float = 1e-12) -> np.ndarray:
    """Assemble the Nambu Hamiltonian H = [[h, d], [d^dag, -h^T]].

    Parameters
    ----------
    h : (n, n) array_like
        Single-particle (hopping/on-site) block, Hermitian.
    delta : (n, n) array_like, optional
        Pairing block, antisymmetric. Defaults to zero.
    atol : float
        Tolerance for the symmetry checks on the inputs.

    Returns
    -------
    (2n, 2n) complex ndarray satisfying hat(H) = -H and H = H^dag.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"h must be square, got shape {h.shape}")
    n = h.shape[0]
    if delta is None:
        delta = np.zeros((n, n))
    delta = np.asarray(delta, dtype=complex)
    if delta.shape != (n, n):
        raise ValueError(f"delta must have shape {(n, n)}, got {delta.shape}")
    dh = float(np.max(np.abs(h - h.conj().T), initial=0.0))
    if dh > atol:
        raise ValueError(f"h is not Hermitian (defect {dh:.3e} > {atol:.1e})")
    dd = float(np.max(np.abs(delta + delta.T), initial=0.0))
    if dd > atol:
        raise ValueError(f"delta is not antisymmetric (defect {dd:.3e} > {atol:.1e})")
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = 0.5 * (h + h.conj().T)
    out[:n, n:] = 0.5 * (delta - delta.T)
    out[n:, :n] = out[:n, n:].conj().T
    out[n:, n:] = -out[:n, :n].T
    return out


def embed_particle_block(g: np.ndarray) -> np.ndarray:
    """Lift an n x n particle-block matrix to the 2n x 2n Nambu space."""
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"expected square block, got shape {g.shape}")
    n = g.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = g
    return out


def validate_hamiltonian(ham: np.ndarray, atol: float = 1e-12) -> None:
    """Check H = H^dag and hat(H) = -H."""
    mode_count(ham)
    dh = hermiticity_defect(ham)
    if dh > atol:
        raise ValueError(f"Hamiltonian not Hermitian (defect {dh:.3e})")
    dp = float(np.max(np.abs(ph_conjugate(ham) + ham)))
    if dp > atol:
        raise ValueError(f"Hamiltonian not ph-odd (defect {dp:.3e})")


def validate_hybridization(gamma: np.ndarray, atol: float = 1e-10,
                           particle_only: bool = True) -> None:
    """Check Gamma_nu: Hermitian, PSD, and (optionally) particle-block support."""
    n = mode_count(gamma)
    dh = hermiticity_defect(gamma)
    if dh > atol:
        raise ValueError(f"hybridization not Hermitian (defect {dh:.3e})")
    w = np.linalg.eigvalsh(0.5 * (gamma + gamma.conj().T))
    if w.min() < -atol:
        raise ValueError(f"hybridization not PSD (min eigenvalue {w.min():.3e})")
    if particle_only:
        off = max(np.max(np.abs(gamma[n:, :])), np.max(np.abs(gamma[:, n:])))
        if off > atol:
            raise ValueError(
                f"hybridization has weight outside the particle block ({off:.3e})")


def validate_correlation(chi: np.ndarray, atol: float = 1e-8) -> dict:
    """Defect report for a correlation matrix chi = <C C^dag>.

    Returns the defects (hermiticity, trace, ph constraint hat(chi) = 1 - chi,
    spectral range) and raises if any exceeds `atol`.
    """
    n = mode_count(chi)
    rep = {
        "hermiticity": hermiticity_defect(chi),
        "trace": abs(np.trace(chi).real - n) + abs(np.trace(chi).imag),
        "ph": float(np.max(np.abs(ph_conjugate(chi) + chi - np.eye(2 * n)))),
    }
    w = np.linalg.eigvalsh(0.5 * (chi + chi.conj().T))
    rep["spectrum"] = float(max(0.0, -w.min(), w.max() - 1.0))
    worst = max(rep.values())
    if worst > atol:
        bad = {k: v for k, v in rep.items() if v > atol}
        raise ValueError(f"correlation-matrix invariants violated: {bad}")
    return rep
