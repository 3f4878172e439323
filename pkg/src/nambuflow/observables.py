"""Physical outputs: expectations, spin correlators, decay fits, currents.

A single-body observable O enters as its doubled (Nambu) matrix, standing for
the operator (1/2) C^dag O C; its mean in a Gaussian state with correlation
matrix chi = <C C^dag> is (1/2) tr{O (1 - chi)}.  The sigma^z structure on
site m is S_m = |m><m| - |m_hat><m_hat| and the connected zz correlator is

    C_{l,m} = (1/2) tr{S_l chi S_m (1 - chi)} ,

i.e. the spin-1/2 (S^z = sigma^z/2) convention: the full sigma^z correlator
is 4 C_{l,m}.  The constant factor never matters here because the consumers
classify the spatial decay of |C| profiles, which is scale invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import QuadraticModel
from .errors import NumericalError
from .nambu import hermiticity_defect, mode_count

__all__ = [
    "QuadraticObservable",
    "quadratic_expectation",
    "spin_z_matrix",
    "zz_correlator_matrix",
    "zz_correlator",
    "averaged_correlation",
    "correlation_profile",
    "DecayFit",
    "classify_decay",
    "energy_current_xy",
    "boundary_current",
]


@dataclass
class QuadraticObservable:
    """Traceless Hermitian Nambu matrix representing (1/2) C^dag O C."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        mode_count(self.matrix)
        dh = hermiticity_defect(self.matrix)
        if dh > 1e-10:
            raise ValueError(f"observable not Hermitian (defect {dh:.3e})")
        tr = complex(np.trace(self.matrix))
        if abs(tr) > 1e-12 * max(1.0, float(np.abs(self.matrix).max())):
            raise ValueError(f"observable not traceless (tr = {tr:.3e})")


def _obs_matrix(obs) -> np.ndarray:
    return obs.matrix if isinstance(obs, QuadraticObservable) else \
        np.asarray(obs, dtype=complex)


def quadratic_expectation(chi: np.ndarray, obs,
                          imag_tol: float = 1e-10) -> float:
    """<(1/2) C^dag O C> = (1/2) tr{O (1 - chi)}, checked real."""
    o = _obs_matrix(obs)
    chi = np.asarray(chi, dtype=complex)
    val = 0.5 * complex(np.trace(o @ (np.eye(len(chi)) - chi)))
    scale = max(1.0, abs(val))
    if abs(val.imag) > imag_tol * scale:
        raise NumericalError(
            f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def spin_z_matrix(n: int, m: int) -> np.ndarray:
    """S_m = |m><m| - |m_hat><m_hat| (doubled sigma^z structure)."""
    if not 0 <= m < n:
        raise ValueError(f"site {m} outside [0, {n})")
    s = np.zeros((2 * n, 2 * n))
    s[m, m] = 1.0
    s[n + m, n + m] = -1.0
    return s


def zz_correlator_matrix(chi: np.ndarray, imag_tol: float = 1e-10) -> np.ndarray:
    """All C_{l,m} at once through the elementwise product chi o (1-chi)^T.

    Expanding (1/2) tr{S_l chi S_m (1-chi)} over the four Nambu index pairs
    gives (1/2)[P_pp - P_ph - P_hp + P_hh] with P_ij = chi_ij (1-chi)_ji.
    """
    chi = np.asarray(chi, dtype=complex)
    n = mode_count(chi)
    p = chi * (np.eye(2 * n) - chi).T
    c = 0.5 * (p[:n, :n] - p[:n, n:] - p[n:, :n] + p[n:, n:])
    worst = float(np.max(np.abs(c.imag)))
    if worst > imag_tol:
        raise NumericalError(f"zz correlator has imaginary residue {worst:.3e}")
    return c.real


def zz_correlator(chi: np.ndarray, l: int, m: int) -> float:
    """Connected zz correlator C_{l,m} (spin-1/2 normalization)."""
    n = mode_count(np.asarray(chi))
    if not (0 <= l < n and 0 <= m < n):
        raise ValueError(f"sites ({l}, {m}) outside [0, {n})")
    return float(zz_correlator_matrix(chi)[l, m])


def correlation_profile(chi: np.ndarray, r_values=None):
    """Averaged correlation magnitudes over base sites in the right half.

    C_bar(r) = mean over m in [M/2, M-1-r] of |C_{m+r,m}|; the window is
    truncated to valid indices, so for the largest r a single term remains.
    Returns (r, C_bar) arrays.
    """
    c = zz_correlator_matrix(chi)
    n = c.shape[0]
    start = n // 2
    r_max = n - 1 - start
    if r_values is None:
        r_values = np.arange(1, r_max + 1)
    r_values = np.asarray(r_values, dtype=int)
    if r_values.size == 0 or r_values.min() < 1 or r_values.max() > r_max:
        raise ValueError(f"r must lie in [1, {r_max}]")
    out = np.empty(r_values.size)
    for i, r in enumerate(r_values):
        ms = np.arange(start, n - r)
        out[i] = np.mean(np.abs(c[ms + r, ms]))
    return r_values, out


def averaged_correlation(chi: np.ndarray, r: int) -> float:
    """Scalar C_bar(r); see correlation_profile."""
    _, prof = correlation_profile(chi, [r])
    return float(prof[0])


@dataclass
class DecayFit:
    """Outcome of competing algebraic vs exponential fits to a |C| profile.

    exponent is the algebraic power p in r^{-p}; corr_length the exponential
    xi in e^{-r/xi}; rss_* the residual sums of squares of the two models on
    log C_bar.  kind picks the lower residual.
    """

    kind: str
    exponent: float
    corr_length: float
    rss_algebraic: float
    rss_exponential: float
    npoints: int


def classify_decay(r, cbar, r_min: int = 3, r_max: int | None = None,
                   noise_floor: float = 1e-13,
                   min_points: int = 8) -> DecayFit:
    """Fit log C_bar against log r (algebraic) and r (exponential).

    Points below noise_floor or outside [r_min, r_max] are dropped; fewer
    than min_points surviving points is an error rather than a guess.
    """
    r = np.asarray(r, dtype=float)
    cbar = np.asarray(cbar, dtype=float)
    keep = (r >= r_min) & (cbar > noise_floor)
    if r_max is not None:
        keep &= r <= r_max
    r, cbar = r[keep], cbar[keep]
    if r.size < min_points:
        raise ValueError(
            f"only {r.size} usable points (need {min_points}) for a decay fit")
    y = np.log(cbar)

    def rss(x):
        coef, res, *_ = np.polyfit(x, y, 1, full=True)
        return coef[0], float(res[0]) if res.size else 0.0

    slope_a, rss_a = rss(np.log(r))
    slope_e, rss_e = rss(r)
    return DecayFit(
        kind="algebraic" if rss_a <= rss_e else "exponential",
        exponent=-slope_a,
        corr_length=np.inf if slope_e >= 0 else -1.0 / slope_e,
        rss_algebraic=rss_a,
        rss_exponential=rss_e,
        npoints=int(r.size),
    )


def energy_current_xy(model: QuadraticModel, m: int) -> QuadraticObservable:
    """Energy current through the right boundary of a segment ending at site m.

    Hard-coded three-site stencil for the transverse-field XY chain in
    fermion language (sites m-1, m, m+1 with m-hat = m + M):

        j_pp = -i j^2 (1-g^2) (|m-1><m+1| - h.c.) - 2 i h j (|m-1><m| - h.c.)
        j_hh = +i j^2 (1-g^2) (|m+1^><m-1^| - h.c.) + 2 i h j (|m^><m-1^| - h.c.)
        j_hp = 2 i g h j (|m^><m-1| - |m-1^><m|)          j_ph = j_hp^dag

    The generic boundary_current construction reproduces these blocks; both
    are kept so each can check the other.
    """
    p = model.params
    if p.get("kind") != "xy_chain":
        raise ValueError("energy_current_xy needs a model built by xy_chain")
    msites, j, g, h = p["m_sites"], p["j_c"], p["gamma_c"], p["h_c"]
    if not 1 <= m <= msites - 2:
        raise ValueError(f"bond site m must lie in [1, {msites - 2}]")
    dim = 2 * msites
    out = np.zeros((dim, dim), dtype=complex)

    def add(a, b, val):
        out[a, b] += val
        out[b, a] -= val  # every term below is i * (antisymmetric), Hermitian

    c1 = -1j * j * j * (1.0 - g * g)
    c2 = -2j * h * j
    c3 = 2j * g * h * j
    add(m - 1, m + 1, c1)
    add(m - 1, m, c2)
    add(msites + m + 1, msites + m - 1, -c1)
    add(msites + m, msites + m - 1, -c2)
    add(msites + m, m - 1, c3)
    add(msites + m - 1, m, -c3)
    return QuadraticObservable(out, label=f"J_e(bond {m},{m + 1})")


def _site_projector(n: int, sites) -> np.ndarray:
    p = np.zeros((2 * n, 2 * n))
    for s in sites:
        p[s, s] = 1.0
        p[n + s, n + s] = 1.0
    return p


def boundary_current(model: QuadraticModel, sites, q,
                     side: str = "right",
                     conservation_tol: float = 1e-10) -> QuadraticObservable:
    """Current of a conserved quantity leaving a contiguous segment.

    Splits H = H_S + H_rest + H_boundary, restricts Q to the segment, checks
    local conservation [H_S, Q_S] = 0, and returns the single-body matrix of
    -i [H_boundary(side), Q_S].
    """
    sites = sorted(int(s) for s in sites)
    n = model.n
    if not sites or sites[0] < 0 or sites[-1] >= n:
        raise ValueError("segment sites out of range")
    if sites != list(range(sites[0], sites[-1] + 1)):
        raise ValueError("segment must be contiguous")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    qm = _obs_matrix(q)
    h = model.hamiltonian
    p_in = _site_projector(n, sites)
    q_s = p_in @ qm @ p_in
    h_s = p_in @ h @ p_in
    comm = h_s @ q_s - q_s @ h_s
    defect = float(np.max(np.abs(comm)))
    scale = max(float(np.abs(h_s).max()), 1.0) * max(float(np.abs(q_s).max()),
                                                     1.0)
    if defect > conservation_tol * scale:
        raise ValueError(
            f"Q is not conserved on the segment ([H_S, Q_S] defect "
            f"{defect:.3e})")
    outer = (range(0, sites[0]) if side == "left"
             else range(sites[-1] + 1, n))
    p_out = _site_projector(n, outer)
    h_bnd = p_in @ h @ p_out + p_out @ h @ p_in
    j = -1j * (h_bnd @ q_s - q_s @ h_bnd)
    return QuadraticObservable(j, label=f"J({side})")
