"""Exception hierarchy shared by all modules."""


class Conformal4Error(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(Conformal4Error):
    pass


class UnsupportedBackground(Conformal4Error):
    pass


class ConeViolation(Conformal4Error):
    """A symmetric endomorphism left the positive cone Gamma_2^+.

    ``index`` is the first offending grid point when the failure happened on
    a reduced field, otherwise ``None``.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NonConvergence(Conformal4Error):
    def __init__(self, message, last_residual=float("nan"), iterations=0):
        super().__init__(message)
        self.last_residual = last_residual
        self.iterations = iterations


class PathFailure(Conformal4Error):
    """The continuation step shrank below its floor before reaching the target."""

    def __init__(self, message, trace=(), last_state=None):
        super().__init__(message)
        self.trace = list(trace)
        self.last_state = last_state


class StaleState(Conformal4Error):
    pass


class HypothesisFailure(Conformal4Error):
    """A theorem hypothesis (positive Yamabe invariant, t0 <= 1, ...) is not met."""
