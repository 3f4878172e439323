"""Top-level acceptance battery.

Ten end-to-end checks covering the analytic limits, the structural
identities, the brute-force oracle, the steady-state machinery, and the two
reference models.  Each test prints a single summary line straight to the
terminal (bypassing capture) with the measured numbers and its wall-clock
time, then asserts the tolerances.  Budgets exclude the one-time kernel
warm-up performed in the module fixture.
"""

import time

import numpy as np
import pytest

from nambuflow.dynamics import (
    QuadraticModel,
    Reservoir,
    decoherence_rates,
    evolve_chi,
    noise_matrix,
    non_markovianity,
)
from nambuflow.models import (
    infinite_temperature_chi,
    thermal_chi,
    tight_binding_chain,
    vacuum_chi,
    xy_chain,
    xy_factorization_field,
)
from nambuflow.nambu import (
    build_hamiltonian,
    embed_particle_block,
    ph_conjugate,
    validate_correlation,
)
from nambuflow.observables import (
    classify_decay,
    correlation_profile,
    energy_current_xy,
    quadratic_expectation,
)
from nambuflow.oracle import DiscretizedBath, bath_benchmark, log_generating_det
from nambuflow.steadystate import noise_matrix_infinity, steady_chi


@pytest.fixture(scope="module", autouse=True)
def _warm_kernels():
    # trigger any JIT compilation and module-level caches before timing
    model = tight_binding_chain(2, 0.3, 0.3, 2.0, 0.1, np.inf, -0.1)
    noise_matrix(model, 0.7)
    noise_matrix_infinity(model)


@pytest.fixture
def report(capsys):
    def _line(num: int, name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"[acceptance {num:02d}] {name}: "
                  f"{'PASS' if ok else 'FAIL'} ({detail})")
    return _line


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def test_01_infinite_temperature_noise_equals_hybridization(report):
    t0 = time.monotonic()
    model = tight_binding_chain(10, 0.5, 0.3, 0.0, 0.7, 0.0, -0.3)
    dev = max(np.max(np.abs(noise_matrix(model, t) - model.gamma_total))
              for t in (0.1, 1.0, 10.0))
    dt = time.monotonic() - t0
    ok = dev < 1e-8 and dt < 1.0
    report(1, "infinite-T noise equals hybridization", ok,
           f"max dev {dev:.2e}, {dt:.2f}s")
    assert dev < 1e-8
    assert dt < 1.0


def test_02_deep_filling_limits(report):
    t0 = time.monotonic()
    model = tight_binding_chain(10, 0.6, 0.2, np.inf, -1e3, np.inf, 1e3)
    empty, filled = model.reservoirs
    dev_empty = np.max(np.abs(noise_matrix(model, 1.0, which=0)
                              - 2.0 * empty.gamma))
    dev_filled = np.max(np.abs(noise_matrix(model, 1.0, which=1)
                               - 2.0 * filled.gamma_hat))
    dev = max(dev_empty, dev_filled)
    dt = time.monotonic() - t0
    ok = dev <= 5e-3 and dt < 1.0
    report(2, "deep filled/empty reservoirs", ok,
           f"empty {dev_empty:.2e}, filled {dev_filled:.2e}, {dt:.2f}s")
    assert dev <= 5e-3
    assert dt < 1.0


def test_03_noise_conjugation_sum_rule(report):
    # N(t) + hat(N(t)) = 2 Gamma for arbitrary quadratic models: random
    # Hamiltonians with pairing, random PSD hybridizations, mixed statistics
    rng = np.random.default_rng(7)
    t0 = time.monotonic()
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 7))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        d = rng.normal(size=(n, n))
        ham = build_hamiltonian(a + a.conj().T, d - d.T)
        reservoirs = []
        for _ in range(int(rng.integers(1, 3))):
            b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            g = embed_particle_block(b @ b.conj().T / n)
            beta = rng.choice([0.0, np.inf, float(rng.exponential(2.0))])
            reservoirs.append(Reservoir(gamma=g, beta=float(beta),
                                        mu=float(rng.normal(scale=2.0))))
        model = QuadraticModel(ham, reservoirs)
        for t in (0.1, float(rng.uniform(0.1, 20.0)), 20.0):
            nmat = noise_matrix(model, t)
            dev = 0.5 * np.max(np.abs(nmat + ph_conjugate(nmat)
                                      - 2.0 * model.gamma_total))
            worst = max(worst, float(dev))
    dt = time.monotonic() - t0
    ok = worst < 1e-8
    report(3, "noise conjugation sum rule", ok,
           f"20 random models, worst {worst:.2e}, {dt:.2f}s")
    assert worst < 1e-8


def test_04_evolution_preserves_state_invariants(report):
    t0 = time.monotonic()
    model = tight_binding_chain(10, 0.5, 0.3, np.inf, 0.5, np.inf, -0.5)
    result = evolve_chi(model, vacuum_chi(10), np.linspace(0.0, 100.0, 21))
    worst = {"hermiticity": 0.0, "trace": 0.0, "ph": 0.0}
    lo, hi = 1.0, 0.0
    for chi in result.chi:
        checks = validate_correlation(chi, atol=np.inf)
        for key in worst:
            worst[key] = max(worst[key], checks[key])
        evals = np.linalg.eigvalsh(chi)
        lo, hi = min(lo, float(evals.min())), max(hi, float(evals.max()))
    dt = time.monotonic() - t0
    ok = (all(v < 1e-7 for v in worst.values())
          and lo > -1e-7 and hi < 1 + 1e-7 and dt < 10.0)
    report(4, "evolution preserves state invariants", ok,
           f"herm {worst['hermiticity']:.1e}, trace {worst['trace']:.1e}, "
           f"ph {worst['ph']:.1e}, spectrum [{lo:.1e}, 1+{hi - 1:.1e}], "
           f"{dt:.1f}s")
    for key, val in worst.items():
        assert val < 1e-7, key
    assert lo > -1e-7 and hi < 1 + 1e-7
    assert dt < 10.0


def test_05_master_equation_matches_discretized_bath(report):
    # four-site chain against a brute-force composite evolution; the lead
    # potentials sit on closed-chain eigenvalues so that the finite-L error
    # is dominated by the Fermi-step discretization term, which halves with L
    t0 = time.monotonic()
    model = tight_binding_chain(4, 0.4, 0.2, np.inf, 0.6180339887498949,
                                np.inf, -1.618033988749895)
    chi0 = infinite_temperature_chi(4)
    times = np.linspace(0.0, 5.0, 26)
    result = evolve_chi(model, chi0, times)
    devs = {}
    for l_modes in (400, 800):
        bench = bath_benchmark(model, chi0, DiscretizedBath(l_modes, 20.0),
                               times)
        devs[l_modes] = max(np.max(np.abs(a - b))
                            for a, b in zip(result.chi, bench.chi_sys))
    factor = devs[800] / devs[400]
    dt = time.monotonic() - t0
    ok = devs[400] < 1e-2 and 0.35 <= factor <= 0.65 and dt < 120.0
    report(5, "master equation matches discretized bath", ok,
           f"dev(L=400) {devs[400]:.2e}, halving factor {factor:.2f}, "
           f"{dt:.0f}s")
    assert devs[400] < 1e-2
    assert 0.35 <= factor <= 0.65
    assert dt < 120.0


def test_06_long_time_evolution_reaches_steady_state(report):
    # start from the decoupled ground state so the weakly damped band-edge
    # modes begin at their steady occupations; a half-filled start leaves
    # them a 1/2 offset that e^{-2 gamma_min t} has not erased by t = 200
    t0 = time.monotonic()
    model = tight_binding_chain(10, 0.6, 0.2, np.inf, 0.25, np.inf, -0.25)
    steady = steady_chi(model)
    chi0 = thermal_chi(model.hamiltonian, np.inf, 0.0)
    result = evolve_chi(model, chi0, np.array([0.0, 200.0]))
    dev = float(np.max(np.abs(result.final() - steady.chi)))
    dt = time.monotonic() - t0
    ok = dev < 1e-4 and steady.residual < 1e-10 and dt < 10.0
    report(6, "long-time evolution reaches steady state", ok,
           f"dev {dev:.2e}, residual {steady.residual:.2e}, {dt:.1f}s")
    assert dev < 1e-4
    assert steady.residual < 1e-10
    assert dt < 10.0


def test_07_nonmarkovianity_scaling_laws(report):
    def f_nm_steady(model) -> float:
        rates, _ = decoherence_rates(noise_matrix_infinity(model))
        return non_markovianity(rates)

    t0 = time.monotonic()
    grid = np.geomspace(20.0, 200.0, 5)
    f_v = [f_nm_steady(tight_binding_chain(50, 0.4, 0.2, np.inf, v / 2,
                                           np.inf, -v / 2)) for v in grid]
    slope_v = loglog_slope(grid, f_v)
    temps = np.geomspace(10.0, 100.0, 5)
    f_t = [f_nm_steady(tight_binding_chain(50, 0.4, 0.2, 1.0 / t, 0.0,
                                           1.0 / t, 0.0)) for t in temps]
    slope_t = loglog_slope(temps, f_t)
    # one-sided: a single reservoir, isolating its own large-mu scaling
    f_m = [f_nm_steady(tight_binding_chain(50, 0.4, 0.0, np.inf, m,
                                           np.inf, 0.0)) for m in grid]
    slope_m = loglog_slope(grid, f_m)
    dt = time.monotonic() - t0
    ok = (abs(slope_v + 1.0) <= 0.1 and abs(slope_t + 2.0) <= 0.2
          and abs(slope_m + 1.0) <= 0.1 and dt < 300.0)
    report(7, "non-Markovianity scaling laws", ok,
           f"V slope {slope_v:.3f}, T slope {slope_t:.3f}, "
           f"one-sided slope {slope_m:.3f}, {dt:.1f}s")
    assert abs(slope_v + 1.0) <= 0.1
    assert abs(slope_t + 2.0) <= 0.2
    assert abs(slope_m + 1.0) <= 0.1
    assert dt < 300.0


def test_08_xy_chain_steady_phases(report):
    def xy_steady(h_c: float, delta_h: float):
        model = xy_chain(60, gamma_c=0.5, h_c=h_c, delta_h=delta_h,
                         rate_left=0.5, rate_right=0.5,
                         beta_left=np.inf, beta_right=np.inf)
        return model, steady_chi(model)

    def decay_kind(chi) -> str:
        r, cbar = correlation_profile(chi)
        # deep in the gapped phase only four separations survive above the
        # numerical floor; the window is the same for every point
        return classify_decay(r, cbar, min_points=4).kind

    def current(model, result) -> float:
        return quadratic_expectation(result.chi, energy_current_xy(model, 30))

    t0 = time.monotonic()
    boundary = xy_factorization_field(0.5)
    # (a) deep in the Markovian regime the decay classification flips
    # across the factorization field
    kinds = {}
    for h_c in (0.5, 1.2):
        _, res = xy_steady(h_c, 30.0)
        kinds[h_c] = decay_kind(res.chi)
    # (b) both potentials inside the gap: no energy transport
    model_i, res_i = xy_steady(0.5, 0.2)
    j_gap = abs(current(model_i, res_i))
    # (c) potentials inside the band: transport with finite slope
    j_lo = current(*xy_steady(0.5, 0.65))
    j_hi = current(*xy_steady(0.5, 0.75))
    dj = abs(j_hi - j_lo) / 0.1
    _, res_ii = xy_steady(0.5, 0.7)
    kind_ii = decay_kind(res_ii.chi)
    # (d) large offsets: current saturates, non-Markovianity dies off as 1/dh
    dhs = np.geomspace(10.0, 100.0, 5)
    f_nm, currents = [], []
    for dh in dhs:
        model, res = xy_steady(0.5, dh)
        f_nm.append(non_markovianity(decoherence_rates(res.noise)[0]))
        currents.append(current(model, res))
    slope = loglog_slope(dhs, f_nm)
    saturation = float(np.ptp(currents) / abs(np.mean(currents)))
    dt = time.monotonic() - t0
    ok = (0.5 < boundary < 1.2
          and kinds[0.5] == "algebraic" and kinds[1.2] == "exponential"
          and j_gap < 1e-6 and dj > 1e-2 and kind_ii == "algebraic"
          and abs(slope + 1.0) <= 0.15 and saturation < 0.05 and dt < 900.0)
    report(8, "xy chain steady phases", ok,
           f"kinds ({kinds[0.5]}, {kinds[1.2]}) across h={boundary}, "
           f"gapped |J_e| {j_gap:.1e}, band dJ/ddh {dj:.2f} ({kind_ii}), "
           f"f_nM slope {slope:.3f}, saturation spread {saturation:.1e}, "
           f"{dt:.1f}s")
    assert 0.5 < boundary < 1.2
    assert kinds[0.5] == "algebraic" and kinds[1.2] == "exponential"
    assert j_gap < 1e-6
    assert dj > 1e-2 and kind_ii == "algebraic"
    assert abs(slope + 1.0) <= 0.15
    assert saturation < 0.05
    assert dt < 900.0


def test_09_contact_rate_structure_and_factorization(report):
    def labeled_rates(mu_left: float, t: float = 2.0):
        model = tight_binding_chain(50, 0.4, 0.2, np.inf, mu_left,
                                    np.inf, 0.5)
        rates, modes = decoherence_rates(noise_matrix(model, t))
        nz = np.abs(rates) > 1e-10
        rates, modes = rates[nz], modes[:, nz]
        left_rows = np.r_[0:25, 50:75]
        weight_left = (np.abs(modes[left_rows]) ** 2).sum(axis=0)
        return model, rates, modes, weight_left > 0.5

    t0 = time.monotonic()
    model, r1, v1, is_left = labeled_rates(1.0)
    _, r2, _, is_left_2 = labeled_rates(2.0)
    n_nonzero = r1.size
    n_pos, n_neg = int(np.sum(r1 > 0)), int(np.sum(r1 < 0))
    right_shift = float(np.max(np.abs(np.sort(r1[~is_left])
                                      - np.sort(r2[~is_left_2]))))
    left_shift = float(np.max(np.abs(np.sort(r1[is_left])
                                     - np.sort(r2[is_left_2]))))
    n_right = noise_matrix(model, 2.0, which=1)
    cross = float(np.max(np.linalg.norm(n_right @ v1[:, is_left], axis=0)))
    dt = time.monotonic() - t0
    ok = (n_nonzero == 8 and n_pos == 4 and n_neg == 4
          and right_shift < 1e-6 and left_shift > 1e-3 and cross < 1e-6
          and dt < 60.0)
    report(9, "contact rate structure and factorization", ok,
           f"{n_nonzero} rates ({n_pos}+/{n_neg}-), right shift "
           f"{right_shift:.1e}, left shift {left_shift:.2f}, "
           f"cross norm {cross:.1e}, {dt:.1f}s")
    assert n_nonzero == 8 and n_pos == 4 and n_neg == 4
    assert right_shift < 1e-6
    assert left_shift > 1e-3
    assert cross < 1e-6
    assert dt < 60.0


def test_10_correlator_generating_function(report):
    rng = np.random.default_rng(11)
    t0 = time.monotonic()
    step = 1e-4
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        d = rng.normal(size=(n, n))
        ham = build_hamiltonian(a + a.conj().T, d - d.T)
        chi = thermal_chi(ham, 1.1, 0.2)
        obs = []
        for _ in range(2):
            b = rng.normal(size=(2 * n, 2 * n)) \
                + 1j * rng.normal(size=(2 * n, 2 * n))
            herm = b + b.conj().T
            # unit spectral norm keeps the h^2 truncation term well below
            # the tolerance without shrinking the step into roundoff
            obs.append(herm / np.linalg.norm(herm, 2))
        o1, o2 = obs
        fd = (log_generating_det(chi, o1, o2, step, step)
              - log_generating_det(chi, o1, o2, step, -step)
              - log_generating_det(chi, o1, o2, -step, step)
              + log_generating_det(chi, o1, o2, -step, -step)) \
            / (4.0 * step * step)
        direct = 0.5 * np.trace(o1 @ chi @ o2 @ (np.eye(2 * n) - chi))
        worst = max(worst, float(abs(fd - direct)))
    dt = time.monotonic() - t0
    ok = worst < 1e-6 and dt < 5.0
    report(10, "correlator generating function", ok,
           f"50 instances, worst FD dev {worst:.2e}, {dt:.1f}s")
    assert worst < 1e-6
    assert dt < 5.0
