"""Shared constants for the finite-time s-kernel quadrature backends.

The integrand weight is

    w(u) = 1/(2 sinh(pi u / 2)) - 1/(pi u),

the exact resummation of -(2/pi) sum_{k>=1} (-1)^{k+1} u/(u^2 + 4k^2).
Near u = 0 both pieces blow up individually, so a Taylor branch of
(1/sinh x - 1/x)/2 in x = pi u/2 is used below X_TAYLOR.
"""

import numpy as np

# Gauss-Kronrod 15/7 pair on [-1, 1] (Kronrod nodes; the embedded 7-point
# Gauss rule lives on the odd-index nodes).
GK15_NODES = np.array([
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
    -0.7415311855993944, -0.5860872354676911, -0.4058451513773972,
    -0.2077849550078985, 0.0, 0.2077849550078985, 0.4058451513773972,
    0.5860872354676911, 0.7415311855993944, 0.8648644233597691,
    0.9491079123427585, 0.9914553711208126,
])
GK15_WEIGHTS = np.array([
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278, 0.2044329400752989,
    0.1903505780647854, 0.1690047266392679, 0.1406532597155259,
    0.1047900103222502, 0.0630920926299785, 0.0229353220105292,
])
G7_WEIGHTS = np.array([
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
    0.1294849661688697,
])

# Taylor branch crossover for the weight (x = pi u / 2); coefficients of
# (1/sinh x - 1/x)/2 = -x/12 + 7x^3/720 - 31x^5/30240 + 127x^7/1209600
#                      - 73x^9/6842880 + ...
X_TAYLOR = 0.25

# Above this tau the finite integral is evaluated in closed form
# (s_inf - E1(i z tau)/pi); the neglected sinh tail is < 4e-21.
TAU_CLOSED = 30.0

# Panel seeding: fraction of an oscillation period per initial panel, and a
# hard cap on initial panel count.
PANELS_PER_PERIOD = 2.0
MAX_INITIAL_PANELS = 1 << 17
MAX_SEGMENT_DEPTH = 28

STATUS_OK = 0
STATUS_NOT_CONVERGED = 1
