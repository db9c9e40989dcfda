"""Exception types shared across the package.

Each class marks a distinct failure mode so callers (and the Monte Carlo
harness, which counts rather than crashes) can tell them apart.
"""


class ConfigurationError(ValueError):
    """Invalid static configuration (kernel, signal, grid, detection)."""


class DomainError(ValueError):
    """A point lies outside the domain or interior margin."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class GridTooLargeError(ConfigurationError):
    """Grid point count exceeds the dense-factorization cap."""


class IllConditionedKernelError(RuntimeError):
    """Covariance factorization failed at the maximum jitter."""


class CurvatureTooLowError(ValueError):
    """Curvature scales are undefined (lambda_n <= 1)."""


class ModelError(ValueError):
    """The signal violates its own structural guarantees."""


class SelectionViolatedError(ValueError):
    """A pivot was requested for a height at or below the selection threshold."""


class DegenerateHessianError(ValueError):
    """A peak Hessian (or carve precision matrix) is not positive definite."""


class MatchingError(RuntimeError):
    """No candidate peak available to match a discovery."""


class NumericalError(RuntimeError):
    """Root bracketing or quadrature failed to converge."""


class WindowError(ValueError):
    """Arguments fall outside the local validity window of an expansion."""
