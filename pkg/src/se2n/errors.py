"""Exception types shared by the se2n modules."""


class SE2NError(Exception):
    """Base class for library errors."""


class DimensionError(SE2NError, ValueError):
    pass


class UnsupportedError(SE2NError, ValueError):
    pass


class InvalidFrequencyError(SE2NError, ValueError):
    pass


class IncompleteFieldError(SE2NError, ValueError):
    pass


class NotCenterableError(SE2NError, ValueError):
    pass


class NotAdmissibleError(SE2NError, ValueError):
    pass


class DegenerateInputError(SE2NError, ValueError):
    pass


class CapExceededError(SE2NError, RuntimeError):
    pass


class NumericalError(SE2NError, ArithmeticError):
    """Raised when a linear system cannot be solved reliably."""


class IllPosedError(NumericalError):
    def __init__(self, nhat, cond):
        self.nhat = nhat
        self.cond = cond
        super().__init__(f"interpolation block n_hat={nhat} is singular (cond={cond:.3g})")


class SolverError(NumericalError):
    pass
