"""Long-time noise matrix and steady states.

Dual-route checks: the spectral-division steady state is compared against
scipy's Schur-based Sylvester solver on the same fixed-point equation, and
against late-time integration of the dynamics; the resonant-level value is
pinned to Lorentzian-filling quadrature.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.linalg import solve_sylvester

from nambuflow.dynamics import (
    QuadraticModel,
    evolve_chi,
    noise_matrix,
    point_contact,
)
from nambuflow.errors import (
    IllConditionedSteadyStateError,
    NoSteadyStateError,
)
from nambuflow.kernels import EULER_GAMMA, LOG_4_OVER_PI, KernelParams, kernel_R
from nambuflow.models import tight_binding_chain, vacuum_chi
from nambuflow.nambu import build_hamiltonian, ph_conjugate
from nambuflow.steadystate import (
    noise_matrix_infinity,
    reduced_kernel,
    steady_chi,
)


def resonant_model(g=0.5, e0=0.7, beta=np.inf, mu=0.3):
    ham = build_hamiltonian(np.array([[e0]]))
    return QuadraticModel(ham, [point_contact(1, 0, g, beta, mu)])


class TestReducedKernel:
    def test_matches_full_kernel_up_to_log_shift(self):
        # R[w, beta, t] - log(t)/pi -> R~(w) for decaying w; the log(t)
        # cancels inside the noise bracket, the rest carries the physics
        w = np.array([-1.0 - 0.1j, 2.0 - 0.5j, 0.3 - 0.05j])
        beta, t = 2.0, 1000.0
        full = kernel_R(w, KernelParams(beta=beta, t=t)) - np.log(t) / np.pi
        assert np.allclose(full, reduced_kernel(w, beta), atol=1e-8)

    def test_zero_temperature_form(self):
        w = np.array([0.4 - 0.2j])
        want = (np.log(1j * w) + EULER_GAMMA + LOG_4_OVER_PI) / np.pi
        assert np.allclose(reduced_kernel(w, np.inf), want, atol=1e-15)

    def test_rejects_non_decaying(self):
        with pytest.raises(ValueError):
            reduced_kernel(np.array([1.0 + 0.0j]), 2.0)


class TestNoiseMatrixInfinity:
    def test_is_late_time_limit(self):
        model = tight_binding_chain(3, 0.4, 0.2, np.inf, 0.25, np.inf, -0.25)
        ninf = noise_matrix_infinity(model)
        assert np.max(np.abs(noise_matrix(model, 200.0) - ninf)) < 1e-9

    def test_finite_temperature_limit(self):
        model = tight_binding_chain(2, 0.5, 0.3, 1.5, 0.4, 4.0, -0.4)
        ninf = noise_matrix_infinity(model)
        assert np.max(np.abs(noise_matrix(model, 150.0) - ninf)) < 1e-9

    def test_structure(self):
        model = tight_binding_chain(4, 0.4, 0.2, np.inf, 0.5, 2.0, -0.5)
        ninf = noise_matrix_infinity(model)
        assert np.max(np.abs(ninf - ninf.conj().T)) < 1e-10
        defect = 0.5 * np.max(np.abs(ninf + ph_conjugate(ninf)
                                     - 2 * model.gamma_total))
        assert defect < 1e-10

    def test_undamped_coupled_mode_raises(self):
        weak = tight_binding_chain(2, 1e-12, 1e-12, np.inf, 0.3, np.inf, -0.3)
        with pytest.raises(NoSteadyStateError):
            noise_matrix_infinity(weak)

    def test_dark_modes_are_skipped(self):
        # two disconnected dimers, contact on the first only: the second
        # dimer's modes are exactly dark and must not poison the limit
        h = np.zeros((4, 4))
        h[0, 1] = h[1, 0] = -1.0
        h[2, 3] = h[3, 2] = -1.0
        model = QuadraticModel(build_hamiltonian(h),
                               [point_contact(4, 0, 0.5, np.inf, 0.2)])
        ninf = noise_matrix_infinity(model)
        assert np.all(np.isfinite(ninf))
        # dark sites never acquire noise
        for a in (2, 3, 6, 7):
            assert np.max(np.abs(ninf[a, :])) < 1e-12


class TestSteadyChi:
    def test_fixed_point_and_validity(self):
        model = tight_binding_chain(3, 0.4, 0.2, np.inf, 0.25, np.inf, -0.25)
        ss = steady_chi(model)
        assert ss.residual < 1e-10
        assert ss.min_gap > 0.1
        k = model.k_matrix
        lhs = -1j * (k @ ss.chi - ss.chi @ k.conj().T) + ss.noise
        assert np.max(np.abs(lhs)) < 1e-12

    def test_agrees_with_sylvester_solver(self):
        model = tight_binding_chain(4, 0.6, 0.2, np.inf, 0.25, 3.0, -0.25)
        ss = steady_chi(model)
        k = model.k_matrix
        chi_syl = solve_sylvester(-1j * k, 1j * k.conj().T, -ss.noise)
        assert np.max(np.abs(chi_syl - ss.chi)) < 1e-11

    def test_agrees_with_late_time_evolution(self):
        model = tight_binding_chain(3, 0.4, 0.2, np.inf, 0.25, np.inf, -0.25)
        ss = steady_chi(model)
        res = evolve_chi(model, vacuum_chi(3), np.array([0.0, 250.0]),
                         rtol=1e-10, atol=1e-12)
        assert np.max(np.abs(res.final() - ss.chi)) < 1e-8

    def test_resonant_level_filling(self):
        g, e0, mu = 0.5, 0.7, 0.3
        ss = steady_chi(resonant_model(g=g, e0=e0, mu=mu))
        n_inf = 1.0 - ss.chi[0, 0].real
        assert n_inf == pytest.approx(
            0.5 + np.arctan((mu - e0) / g) / np.pi, abs=1e-12)

    def test_resonant_level_finite_temperature(self):
        g, e0, mu, beta = 0.5, 0.7, 0.3, 2.0
        ss = steady_chi(resonant_model(g=g, e0=e0, beta=beta, mu=mu))
        n_inf = 1.0 - ss.chi[0, 0].real

        def integrand(eps):
            return (g / np.pi) / ((eps - e0) ** 2 + g ** 2) \
                / (1.0 + np.exp(beta * (eps - mu)))

        cutoff = 1e4
        ref = quad(integrand, -cutoff, 40.0, points=[e0, mu], limit=400)[0]
        ref += g / (np.pi * (cutoff + e0))
        assert n_inf == pytest.approx(ref, abs=1e-7)

    def test_infinite_temperature_is_maximally_mixed(self):
        # beta = 0 leads: N = 2 Gamma and chi = 1/2 solves the fixed point
        model = tight_binding_chain(3, 0.4, 0.2, 0.0, 0.6, 0.0, -0.6)
        ss = steady_chi(model)
        assert np.allclose(ss.chi, 0.5 * np.eye(6), atol=1e-12)

    def test_dark_modes_block_the_spectral_formula(self):
        h = np.zeros((4, 4))
        h[0, 1] = h[1, 0] = -1.0
        h[2, 3] = h[3, 2] = -1.0
        model = QuadraticModel(build_hamiltonian(h),
                               [point_contact(4, 0, 0.5, np.inf, 0.2)])
        with pytest.raises(IllConditionedSteadyStateError) as exc:
            steady_chi(model)
        assert exc.value.min_gap == pytest.approx(0.0, abs=1e-12)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_random_chains_satisfy_fixed_point(self, seed):
        rng = np.random.default_rng(seed)
        model = tight_binding_chain(
            int(rng.integers(2, 6)),
            float(rng.uniform(0.1, 0.8)), float(rng.uniform(0.1, 0.8)),
            float(rng.choice([0.0, 2.0, np.inf])), float(rng.uniform(-1, 1)),
            float(rng.choice([0.0, 2.0, np.inf])), float(rng.uniform(-1, 1)))
        ss = steady_chi(model)
        assert ss.residual < 1e-9
        k = model.k_matrix
        chi_syl = solve_sylvester(-1j * k, 1j * k.conj().T, -ss.noise)
        assert np.max(np.abs(chi_syl - ss.chi)) < 1e-9
