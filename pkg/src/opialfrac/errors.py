"""Exception types shared across the toolkit."""


class EvaluationError(ValueError):
    """An integrand produced a non-finite value at a known abscissa."""

    def __init__(self, message: str, abscissa: float):
        super().__init__(f"{message} (x={abscissa!r})")
        self.abscissa = abscissa


class ConvergenceError(RuntimeError):
    """Adaptive refinement hit its depth cap before meeting the tolerance.

    Carries the best available estimate so callers can decide whether the
    failure means divergence or merely an over-tight tolerance.
    """

    def __init__(self, message: str, best_estimate: float, err_estimate: float):
        super().__init__(
            f"{message} (best_estimate={best_estimate!r}, err_estimate={err_estimate!r})"
        )
        self.best_estimate = best_estimate
        self.err_estimate = err_estimate


class DivergenceError(ValueError):
    """The requested integral is known a priori to diverge."""


class HypothesisFailure(Exception):
    """Inputs violate a hypothesis of the inequality being checked."""


class ConfigError(ValueError):
    """A problem configuration failed validation.

    ``where`` is a JSON-path style anchor such as ``$.mu0.atoms[1]``.
    """

    def __init__(self, where: str, message: str):
        super().__init__(f"config error at {where}: {message}")
        self.where = where
