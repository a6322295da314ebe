"""Exception hierarchy shared by all modules."""


class Su2StarError(Exception):
    """Base class for every error raised by this package."""


# -- group / chart -----------------------------------------------------------

class ChartError(Su2StarError, ValueError):
    """Momentum outside the principal chart theta*|p| < pi."""


class AntipodalElement(Su2StarError, ArithmeticError):
    """Logarithm requested at (or within tolerance of) the antipode -1."""


class AntipodalProduct(AntipodalElement):
    """A group product landed on the antipode, so its momentum is undefined."""


class NearChartBoundary(ChartError):
    """Finite-difference stencil would leave the principal chart."""


# -- functional calculus -----------------------------------------------------

class OrderTooLarge(Su2StarError, ValueError):
    pass


class InsufficientOrder(Su2StarError, ValueError):
    pass


class InsufficientDerivatives(InsufficientOrder):
    pass


class SeriesMismatch(Su2StarError, ArithmeticError):
    """Closed form and truncated series of a functional disagree."""


class ConstraintViolation(Su2StarError, ValueError):
    """Functionals flagged as a *-representation fail the constraint check."""


class DomainError(Su2StarError, ValueError):
    pass


class SingularPhi(DomainError):
    pass


# -- quantization / field theory ---------------------------------------------

class ConvergenceFailure(Su2StarError, ArithmeticError):
    pass


class QuadratureFailure(Su2StarError, ArithmeticError):
    pass


class IntegrandSingular(QuadratureFailure):
    pass


class OutOfRange(Su2StarError, ValueError):
    pass


class KernelSingular(Su2StarError, ArithmeticError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
