"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """Base class for numerical failures (CLI maps these to exit code 3)."""


class QuadratureError(NumericalError):
    """Kernel quadrature failed to converge; carries the achieved estimate."""

    def __init__(self, msg, achieved=None):
        super().__init__(msg)
        self.achieved = achieved


class NearDefectiveError(NumericalError):
    """Eigenvector matrix too ill-conditioned for a spectral evaluation."""

    def __init__(self, msg, cond=None):
        super().__init__(msg)
        self.cond = cond


class EvolutionError(NumericalError):
    """Time integration failed (step underflow or invariant blow-up)."""


class NoSteadyStateError(NumericalError):
    """A mode coupled to the reservoirs does not decay."""


class IllConditionedSteadyStateError(NumericalError):
    """Spectral gaps too small for the steady-state formula."""

    def __init__(self, msg, min_gap=None):
        super().__init__(msg)
        self.min_gap = min_gap
