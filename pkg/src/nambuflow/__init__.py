"""Exact memory-kernel dynamics of open quadratic fermion systems.

The package evolves the single-particle correlation matrix chi = <C C^dag>
of a Bogoliubov-de Gennes (Nambu) Hamiltonian coupled to wide-band thermal
reservoirs, without a Markov approximation: the reservoir memory enters
through closed-form frequency kernels evaluated on the eigenmodes of the
non-Hermitian generator K = H - i Gamma.  On top of the evolution sit
time-dependent decoherence rates, steady states, transport and correlation
observables, and brute-force oracles (discretized baths, exact Fock
algebra) used to validate everything end to end.
"""

from .dynamics import (EvolutionResult, QuadraticModel, Reservoir,
                       decoherence_rates, evolve_chi, evolve_chi_duhamel,
                       noise_matrix, non_markovianity, point_contact)
from .errors import (EvolutionError, IllConditionedSteadyStateError,
                     NearDefectiveError, NoSteadyStateError, NumericalError,
                     QuadratureError)
from .kernels import (KernelParams, SpectralDecomposition, kernel_R,
                      kernel_r, kernel_s, kernel_s_batch, kernel_s_infinity,
                      matrix_function, memory_weight, spectral_decomposition)
from .models import (charge_matrix, filled_chi, infinite_temperature_chi,
                     initial_chi, thermal_chi, tight_binding_chain,
                     vacuum_chi, xy_chain, xy_dispersion,
                     xy_factorization_field)
from .nambu import (build_hamiltonian, mode_count, ph_conjugate,
                    swap_matrix, validate_correlation, validate_hamiltonian,
                    validate_hybridization)
from .observables import (DecayFit, QuadraticObservable, averaged_correlation,
                          boundary_current, classify_decay,
                          correlation_profile, energy_current_xy,
                          quadratic_expectation, spin_z_matrix,
                          zz_correlator, zz_correlator_matrix)
from .steadystate import (SteadyStateResult, noise_matrix_infinity,
                          reduced_kernel, steady_chi)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # nambu
    "build_hamiltonian", "mode_count", "ph_conjugate", "swap_matrix",
    "validate_correlation", "validate_hamiltonian", "validate_hybridization",
    # kernels
    "KernelParams", "SpectralDecomposition", "kernel_R", "kernel_r",
    "kernel_s", "kernel_s_batch", "kernel_s_infinity", "matrix_function",
    "memory_weight", "spectral_decomposition",
    # dynamics
    "EvolutionResult", "QuadraticModel", "Reservoir", "decoherence_rates",
    "evolve_chi", "evolve_chi_duhamel", "noise_matrix", "non_markovianity",
    "point_contact",
    # steady state
    "SteadyStateResult", "noise_matrix_infinity", "reduced_kernel",
    "steady_chi",
    # models
    "charge_matrix", "filled_chi", "infinite_temperature_chi", "initial_chi",
    "thermal_chi", "tight_binding_chain", "vacuum_chi", "xy_chain",
    "xy_dispersion", "xy_factorization_field",
    # observables
    "DecayFit", "QuadraticObservable", "averaged_correlation",
    "boundary_current", "classify_decay", "correlation_profile",
    "energy_current_xy", "quadratic_expectation", "spin_z_matrix",
    "zz_correlator", "zz_correlator_matrix",
    # errors
    "EvolutionError", "IllConditionedSteadyStateError", "NearDefectiveError",
    "NoSteadyStateError", "NumericalError", "QuadratureError",
]
