"""Exception hierarchy shared by every module."""


class GnpError(Exception):
    """Base class for all package errors."""


class InputError(GnpError, ValueError):
    """Invalid user input (non-prime p, malformed polynomial, bad exponent set...)."""


class BudgetExceeded(GnpError):
    """An enumeration or point-count budget was exhausted before completion."""


class IntegralityError(GnpError, ArithmeticError):
    """A division that must be exact in Z[zeta_p] was not; signals an arithmetic bug."""


class PrecisionError(GnpError, ArithmeticError):
    """Finite pi-adic precision is too low to decide the requested congruence."""
