"""Exception hierarchy shared by every module."""


class CknLabError(Exception):
    """Base class for all package errors."""


class AdmissibilityError(CknLabError, ValueError):
    def __init__(self, clause, message):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


class DomainError(CknLabError, ValueError):
    pass


class OriginError(CknLabError, ValueError):
    pass


class OriginOnBoundaryError(CknLabError, ValueError):
    pass


class DegenerateFrameError(CknLabError, ArithmeticError):
    pass


class ConstructionError(CknLabError, ValueError):
    pass


class StencilOutOfRange(CknLabError, IndexError):
    pass


class PositivityError(CknLabError, ValueError):
    pass


class SupportError(CknLabError, ValueError):
    pass


class RegimeError(CknLabError, ValueError):
    pass


class SolverResidualTooLarge(CknLabError, ArithmeticError):
    pass


class BlowupError(CknLabError, ArithmeticError):
    """Raised when a radial shot leaves the admissible range ``(0, u_max]``."""

    def __init__(self, message, r_exit=None, direction=0):
        super().__init__(message)
        self.r_exit = r_exit
        # +1: exceeded u_max, -1: reached zero
        self.direction = direction


class StiffnessError(CknLabError, ArithmeticError):
    pass


class PositivityLoss(CknLabError, ArithmeticError):
    pass


class ConfigError(CknLabError, ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
