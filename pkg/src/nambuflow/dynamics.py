"""Open dynamics of quadratic fermion models with wide-band reservoirs.

Everything is driven by two matrices: the damping generator K = H - i Gamma,
with Gamma the particle-hole symmetrized sum of reservoir hybridizations, and
the time-dependent noise matrix

    N(t) = sum_nu (G_nu + hat G_nu)
           - i [A- G_nu - G_nu A-^dag + A+ hat G_nu - hat G_nu A+^dag] ,

where A+- = R[K +- mu_nu; beta_nu, t] is the memory kernel evaluated on the
spectrum of K (kernel-convention beta_nu = physical beta / 2).  The particle
block pairs with the -mu shift because the lead correlation function carries
e^{-i mu u}; both pairings reproduce the exact resonant-level solution and
the discretized-bath benchmark, which fix sign conventions the structural
identities cannot see.  The
pair-correlation matrix chi(t) = <C C^dag> then obeys

    d chi / dt = -i (K chi - chi K^dag) + N(t) .

Since hat(K) = -K^dag, the right-hand side preserves the kinematic
constraints (chi Hermitian, tr chi = n, hat(chi) = 1 - chi) exactly; the
integrators below monitor them as defect diagnostics rather than enforcing
them.

Two integration routes are kept deliberately independent.  evolve_chi
augments the ODE state with accumulators for the s-kernel integrals (one per
reservoir, shifted frequency, and sign) so the right-hand side never does
quadrature; evolve_chi_duhamel works in the eigenbasis of K and applies
fixed-order panel quadrature to the variation-of-constants integral,
evaluating N(u) at every node through the adaptive kernel quadrature.
Agreement between the two pins the accumulator construction and the
integrator at the same time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import EvolutionError, NumericalError
from .kernels import (
    KernelParams,
    kernel_R,
    kernel_r,
    kernel_s_batch,
    memory_weight,
    spectral_decomposition,
)
from .nambu import (
    embed_particle_block,
    mode_count,
    ph_conjugate,
    validate_correlation,
    validate_hamiltonian,
    validate_hybridization,
)

__all__ = [
    "Reservoir",
    "point_contact",
    "QuadraticModel",
    "noise_matrix",
    "decoherence_rates",
    "non_markovianity",
    "EvolutionResult",
    "evolve_chi",
    "evolve_chi_duhamel",
]

_IM_TOL = 1e-10


@dataclass(eq=False)
class Reservoir:
    """Wide-band reservoir coupled through a PSD particle-block hybridization.

    gamma is 2n x 2n with support only in the upper-left (particle) block;
    beta and mu are the physical inverse temperature and chemical potential.
    beta may be 0 (infinite temperature) or inf (zero temperature).
    """

    gamma: np.ndarray
    beta: float
    mu: float
    label: str = ""

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=complex)
        if np.isnan(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be in [0, inf], got {self.beta}")
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")

    @property
    def beta_kernel(self) -> float:
        # kernel convention carries half the physical inverse temperature
        return self.beta / 2.0

    @cached_property
    def gamma_hat(self) -> np.ndarray:
        return ph_conjugate(self.gamma)


def point_contact(n: int, site: int, rate: float, beta: float, mu: float,
                  label: str = "") -> Reservoir:
    """Reservoir attached to a single orbital with hybridization strength rate."""
    if not 0 <= site < n:
        raise ValueError(f"site {site} outside [0, {n})")
    if rate < 0:
        raise ValueError("rate must be non-negative")
    g = np.zeros((n, n))
    g[site, site] = rate
    return Reservoir(gamma=embed_particle_block(g), beta=beta, mu=mu,
                     label=label)


def _clamp_decaying(values: np.ndarray, tol: float = _IM_TOL) -> np.ndarray:
    """Force Im(lambda) <= 0, failing loudly beyond roundoff tolerance."""
    values = np.asarray(values, dtype=complex)
    worst = float(values.imag.max(initial=-np.inf))
    if worst > tol:
        raise NumericalError(
            f"damping spectrum has a growing mode (Im lambda = {worst:.3e}); "
            "hybridization is not dissipative")
    return np.where(values.imag > 0.0, values.real + 0.0j, values)


class QuadraticModel:
    """Quadratic system Hamiltonian plus a set of wide-band reservoirs.

    Validates the Nambu symmetries on construction and caches the
    eigendecomposition of K = H - i Gamma (eigenvalues clamped to the closed
    lower half-plane, where the memory kernel is defined).
    """

    def __init__(self, hamiltonian: np.ndarray,
                 reservoirs: Sequence[Reservoir], atol: float = 1e-12,
                 params: dict | None = None):
        self.hamiltonian = np.asarray(hamiltonian, dtype=complex)
        self.n = mode_count(self.hamiltonian)
        validate_hamiltonian(self.hamiltonian, atol=atol)
        self.reservoirs = tuple(reservoirs)
        # builder metadata (model kind and couplings), for observables that
        # are specific to a named model
        self.params = dict(params or {})
        for res in self.reservoirs:
            if mode_count(res.gamma) != self.n:
                raise ValueError("reservoir dimension does not match system")
            validate_hybridization(res.gamma)

    @cached_property
    def gamma_total(self) -> np.ndarray:
        g = np.zeros((2 * self.n, 2 * self.n), dtype=complex)
        for res in self.reservoirs:
            g += res.gamma + res.gamma_hat
        return g

    @cached_property
    def k_matrix(self) -> np.ndarray:
        return self.hamiltonian - 1j * self.gamma_total

    @cached_property
    def k_modes(self):
        d = spectral_decomposition(self.k_matrix)
        d.values = _clamp_decaying(d.values)
        return d

    @property
    def min_decay(self) -> float:
        """Smallest damping rate -Im(lambda) over the spectrum of K."""
        return float(np.min(-self.k_modes.values.imag))


def _reservoir_noise(res: Reservoir, modes, t: float) -> np.ndarray:
    g, gh = res.gamma, res.gamma_hat
    base = g + gh
    if res.beta == 0.0:
        # infinite temperature: R is a real multiple of the identity and the
        # commutator-like bracket cancels identically
        return base
    params = KernelParams(beta=res.beta_kernel, t=float(t))
    rp = kernel_R(modes.values + res.mu, params)
    rm = kernel_R(modes.values - res.mu, params)
    a_p = (modes.right * rp[None, :]) @ modes.left
    a_m = (modes.right * rm[None, :]) @ modes.left
    # particle block pairs with the -mu shift, hole block with +mu: the lead
    # correlation F(u) ~ e^{-i mu u} attaches e^{+i mu u} to the Gamma term
    return base - 1j * (a_m @ g - g @ a_m.conj().T
                        + a_p @ gh - gh @ a_p.conj().T)


def noise_matrix(model: QuadraticModel, t: float,
                 which: int | None = None) -> np.ndarray:
    """Noise matrix N(t), summed over reservoirs or for a single one.

    Evaluates the memory kernel on the (cached) spectrum of K by direct
    kernel calls; independent of any evolution state.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    modes = model.k_modes
    sel = model.reservoirs if which is None else (model.reservoirs[which],)
    out = np.zeros((2 * model.n, 2 * model.n), dtype=complex)
    for res in sel:
        out += _reservoir_noise(res, modes, t)
    return out


def decoherence_rates(nmat: np.ndarray, zero_threshold: float = 1e-10):
    """Eigen-rates of the (Hermitian) noise matrix, descending, with modes.

    Rates below zero_threshold in magnitude are flushed to exact zero so
    that structural null modes do not pollute downstream sums.
    Returns (rates, modes) with modes[:, l] the unit eigenvector of rates[l].
    """
    nmat = np.asarray(nmat, dtype=complex)
    vals, vecs = np.linalg.eigh(0.5 * (nmat + nmat.conj().T))
    order = np.argsort(vals)[::-1]
    rates = vals[order]
    rates = np.where(np.abs(rates) < zero_threshold, 0.0, rates)
    return rates, vecs[:, order]


def non_markovianity(rates) -> float:
    """Instantaneous non-Markovianity measure: total weight of negative rates."""
    r = np.asarray(rates, dtype=float)
    return float(0.5 * (np.abs(r).sum() - r.sum()))


@dataclass
class EvolutionResult:
    """Trajectory of chi(t) with per-snapshot invariant defects."""

    times: np.ndarray
    chi: np.ndarray
    defects: np.ndarray
    nfev: int = 0
    extras: dict = field(default_factory=dict)

    def final(self) -> np.ndarray:
        return self.chi[-1]


def _defect(chi: np.ndarray, tol: float) -> float:
    try:
        rep = validate_correlation(chi, atol=tol)
    except ValueError as exc:
        raise EvolutionError(str(exc)) from exc
    return float(max(rep.values()))


class _AugmentedRHS:
    """Right-hand side of the chi ODE with s-kernel accumulators.

    State layout: [vec(chi) | sigma_1 | sigma_2 | ...] where each sigma block
    (finite nonzero beta reservoirs only) holds s[beta w, t/beta] for the 4n
    shifted mode frequencies w = lambda +- mu, in (plus, minus) order.
    """

    def __init__(self, model: QuadraticModel):
        self.model = model
        modes = model.k_modes
        self.v, self.vi, self.w = modes.right, modes.left, modes.values
        self.k = model.k_matrix
        self.kd = self.k.conj().T
        self.m = (2 * model.n) ** 2
        self.base = np.zeros_like(model.gamma_total)
        self.active = []
        offset = self.m
        for res in model.reservoirs:
            self.base += res.gamma + res.gamma_hat
            if res.beta == 0.0:
                continue
            omega = np.concatenate([self.w + res.mu, self.w - res.mu])
            sl = None
            if np.isfinite(res.beta):
                sl = slice(offset, offset + omega.size)
                offset += omega.size
            self.active.append((res, omega, sl))
        self.size = offset

    def initial_state(self, chi0: np.ndarray, t0: float) -> np.ndarray:
        y0 = np.zeros(self.size, dtype=complex)
        y0[:self.m] = np.asarray(chi0, dtype=complex).ravel()
        for res, omega, sl in self.active:
            if sl is None:
                continue
            bk = res.beta_kernel
            y0[sl] = (0.0 if t0 == 0.0
                      else kernel_s_batch(bk * omega, t0 / bk))
        return y0

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        dim = 2 * self.model.n
        chi = y[:self.m].reshape(dim, dim)
        out = np.empty_like(y)
        nmat = self.base.copy()
        for res, omega, sl in self.active:
            rvals = kernel_r(omega * t)
            if sl is not None:
                rvals = rvals + y[sl]
                bk = res.beta_kernel
                out[sl] = -np.exp(-1j * omega * t) \
                    * memory_weight(t / bk) / bk
            half = omega.size // 2
            a_p = (self.v * rvals[None, :half]) @ self.vi
            a_m = (self.v * rvals[None, half:]) @ self.vi
            g, gh = res.gamma, res.gamma_hat
            nmat -= 1j * (a_m @ g - g @ a_m.conj().T
                          + a_p @ gh - gh @ a_p.conj().T)
        dchi = -1j * (self.k @ chi - chi @ self.kd) + nmat
        out[:self.m] = dchi.ravel()
        return out


def evolve_chi(model: QuadraticModel, chi0: np.ndarray, times,
               rtol: float = 1e-8, atol: float = 1e-10,
               defect_tol: float = 1e-6, method: str = "RK45") -> EvolutionResult:
    """Propagate chi(t) to the requested output times (monotone, t >= 0).

    Raises EvolutionError if the integrator gives up or the kinematic
    invariants of chi drift beyond defect_tol at any output time.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("times must be a non-empty 1-d array")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be non-negative and strictly increasing")
    chi0 = np.asarray(chi0, dtype=complex)
    validate_correlation(chi0, atol=1e-7)
    rhs = _AugmentedRHS(model)
    y0 = rhs.initial_state(chi0, float(times[0]))
    if times.size == 1:
        return EvolutionResult(times=times, chi=chi0[None, :, :],
                               defects=np.array([_defect(chi0, defect_tol)]))
    sol = solve_ivp(rhs, (times[0], times[-1]), y0, t_eval=times,
                    method=method, rtol=rtol, atol=atol)
    if not sol.success:
        raise EvolutionError(f"time integration failed: {sol.message}")
    dim = 2 * model.n
    chis = sol.y[:rhs.m].T.reshape(len(times), dim, dim)
    defects = np.array([_defect(c, defect_tol) for c in chis])
    return EvolutionResult(times=times, chi=chis, defects=defects,
                           nfev=int(sol.nfev))


def evolve_chi_duhamel(model: QuadraticModel, chi0: np.ndarray, times,
                       gl_order: int = 12, panels_per_period: float = 4.0,
                       max_panel: float = 0.5,
                       defect_tol: float = 1e-6) -> EvolutionResult:
    """chi(t) through the eigenbasis variation-of-constants integral.

    Interval recurrence M(t1) = e^{-i W dt} o M(t0) + int e^{i W (u - t1)}
    o N~(u) du with W_ab = lambda_a - conj(lambda_b); all exponentials have
    non-positive real exponent, so the recurrence is overflow-safe.  N(u)
    comes from direct kernel quadrature at Gauss-Legendre nodes.  Slow and
    deliberate: this is the cross-check route, not the production one.
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0:
        raise ValueError("duhamel route starts at t = 0")
    chi0 = np.asarray(chi0, dtype=complex)
    modes = model.k_modes
    v, vi, w = modes.right, modes.left, modes.values
    big_w = w[:, None] - w.conj()[None, :]
    m = vi @ chi0 @ vi.conj().T
    mu_max = max((abs(r.mu) for r in model.reservoirs), default=0.0)
    fmax = 2.0 * float(np.max(np.abs(w))) + mu_max + 1.0
    nodes, wts = np.polynomial.legendre.leggauss(gl_order)
    chis = [chi0]
    for t0, t1 in zip(times[:-1], times[1:]):
        dt = t1 - t0
        npan = int(max(2, np.ceil(dt * fmax * panels_per_period / (2 * np.pi)),
                       np.ceil(dt / max_panel)))
        edges = np.linspace(t0, t1, npan + 1)
        acc = np.zeros_like(m)
        for a, b in zip(edges[:-1], edges[1:]):
            um = 0.5 * (a + b) + 0.5 * (b - a) * nodes
            for u, wt in zip(um, 0.5 * (b - a) * wts):
                ntil = vi @ noise_matrix(model, float(u)) @ vi.conj().T
                acc += wt * np.exp(1j * big_w * (u - t1)) * ntil
        m = np.exp(-1j * big_w * dt) * m + acc
        chis.append(v @ m @ v.conj().T)
    chis = np.array(chis)
    defects = np.array([_defect(c, defect_tol) for c in chis])
    return EvolutionResult(times=times, chi=chis, defects=defects)
