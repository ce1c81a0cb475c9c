"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """A tilt parameter lies outside the open domain (-xi, xi)."""


class UndefinedAtZero(ValueError):
    """A quantity that divides by lambda'(eta) was requested at eta = 0."""


class QuadratureFailure(ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class ConvergenceFailure(ArithmeticError):
    """A root search exhausted its iteration budget."""


class UnsupportedTail(NotImplementedError):
    """The model has no closed-form tail; fall back to Monte Carlo."""


class GenericSamplerFailure(RuntimeError):
    """The numeric inverse-CDF table could not bracket a uniform draw."""
