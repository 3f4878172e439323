"""Model builders: boundary-driven chains and Gaussian initial states.

Conventions for the pair-correlation matrix chi = <C C^dag>: the vacuum is
diag(1, 0) in (particle, hole) block order, the completely filled state
diag(0, 1), infinite temperature is chi = 1/2.  Thermal states of a quadratic
Hamiltonian H at chemical potential mu are

    chi = [1 + exp(-beta (H - mu Q))]^{-1} ,   Q = diag(1_n, -1_n) ,

which lands on the Fermi factors <c c^dag> = 1 - n_F in the particle block.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .dynamics import QuadraticModel, point_contact
from .nambu import build_hamiltonian, mode_count

__all__ = [
    "charge_matrix",
    "vacuum_chi",
    "filled_chi",
    "infinite_temperature_chi",
    "thermal_chi",
    "initial_chi",
    "tight_binding_chain",
    "xy_chain",
    "xy_dispersion",
    "xy_factorization_field",
]


def charge_matrix(n: int) -> np.ndarray:
    """Total-charge generator Q = diag(1_n, -1_n) (ph-odd like H)."""
    return np.diag(np.r_[np.ones(n), -np.ones(n)])


def vacuum_chi(n: int) -> np.ndarray:
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = np.eye(n)
    return out


def filled_chi(n: int) -> np.ndarray:
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[n:, n:] = np.eye(n)
    return out


def infinite_temperature_chi(n: int) -> np.ndarray:
    return 0.5 * np.eye(2 * n, dtype=complex)


def thermal_chi(hamiltonian: np.ndarray, beta: float, mu: float = 0.0,
                degeneracy_tol: float = 1e-12) -> np.ndarray:
    """Thermal chi of a quadratic Hamiltonian; beta = inf fills E < mu levels.

    Zero modes at beta = inf get occupation 1/2, which is the unique
    assignment compatible with hat(chi) = 1 - chi.
    """
    ham = np.asarray(hamiltonian, dtype=complex)
    n = mode_count(ham)
    if np.isnan(beta) or beta < 0:
        raise ValueError(f"beta must be in [0, inf], got {beta}")
    w, u = np.linalg.eigh(ham - mu * charge_matrix(n))
    if np.isinf(beta):
        f = np.where(w > degeneracy_tol, 1.0,
                     np.where(w < -degeneracy_tol, 0.0, 0.5))
    else:
        f = expit(beta * w)
    return (u * f[None, :]) @ u.conj().T


def initial_chi(kind: str, n: int, hamiltonian: np.ndarray | None = None,
                beta: float | None = None, mu: float = 0.0) -> np.ndarray:
    """Named initial states for configs: vacuum / filled / infinite_T / thermal."""
    if kind == "vacuum":
        return vacuum_chi(n)
    if kind == "filled":
        return filled_chi(n)
    if kind == "infinite_T":
        return infinite_temperature_chi(n)
    if kind == "thermal":
        if hamiltonian is None or beta is None:
            raise ValueError("thermal initial state needs hamiltonian and beta")
        return thermal_chi(hamiltonian, beta, mu)
    raise ValueError(f"unknown initial state {kind!r}")


def tight_binding_chain(m_sites: int, rate_left: float, rate_right: float,
                        beta_left: float, mu_left: float, beta_right: float,
                        mu_right: float, hopping: float = 1.0) -> QuadraticModel:
    """Open chain h = -hopping * sum(|j><j+1| + h.c.) with end reservoirs."""
    if m_sites < 2:
        raise ValueError("need at least two sites")
    h = np.zeros((m_sites, m_sites))
    idx = np.arange(m_sites - 1)
    h[idx, idx + 1] = -hopping
    h[idx + 1, idx] = -hopping
    ham = build_hamiltonian(h)
    res = [
        point_contact(m_sites, 0, rate_left, beta_left, mu_left, label="L"),
        point_contact(m_sites, m_sites - 1, rate_right, beta_right, mu_right,
                      label="R"),
    ]
    params = {"kind": "tight_binding_chain", "m_sites": m_sites,
              "hopping": hopping}
    return QuadraticModel(ham, res, params=params)


def xy_chain(m_sites: int, gamma_c: float, h_c: float, delta_h: float,
             rate_left: float, rate_right: float, beta_left: float,
             beta_right: float, j_c: float = 1.0) -> QuadraticModel:
    """Spin-XY chain in fermion language, boundary-driven at both ends.

    Jordan-Wigner maps the anisotropic XY chain in a transverse field onto
    hopping -j_c, pairing delta_{m,m+1} = j_c * gamma_c and on-site energy
    -2 h_c.  The driving bias enters as lead potentials mu_{L/R} = +-2 delta_h
    (the factor 2 matches the -2 h_c field convention).
    """
    if m_sites < 2:
        raise ValueError("need at least two sites")
    h = np.zeros((m_sites, m_sites))
    idx = np.arange(m_sites - 1)
    h[idx, idx + 1] = -j_c
    h[idx + 1, idx] = -j_c
    h[np.arange(m_sites), np.arange(m_sites)] = -2.0 * h_c
    delta = np.zeros((m_sites, m_sites))
    delta[idx, idx + 1] = j_c * gamma_c
    delta[idx + 1, idx] = -j_c * gamma_c
    ham = build_hamiltonian(h, delta)
    res = [
        point_contact(m_sites, 0, rate_left, beta_left, 2.0 * delta_h,
                      label="L"),
        point_contact(m_sites, m_sites - 1, rate_right, beta_right,
                      -2.0 * delta_h, label="R"),
    ]
    params = {"kind": "xy_chain", "m_sites": m_sites, "j_c": j_c,
              "gamma_c": gamma_c, "h_c": h_c, "delta_h": delta_h}
    return QuadraticModel(ham, res, params=params)


def xy_dispersion(k, gamma_c: float, h_c: float, j_c: float = 1.0):
    """Bulk quasiparticle energy 2 sqrt((j cos k + h)^2 + (j gamma sin k)^2)."""
    k = np.asarray(k, dtype=float)
    return 2.0 * np.sqrt((j_c * np.cos(k) + h_c) ** 2
                         + (j_c * gamma_c * np.sin(k)) ** 2)


def xy_factorization_field(gamma_c: float) -> float:
    """Field h_c = 1 - gamma_c^2 where the XY ground state factorizes."""
    return 1.0 - gamma_c ** 2
