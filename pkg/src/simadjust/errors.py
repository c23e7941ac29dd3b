"""Exception taxonomy shared across the package.

Two families matter to callers: bad input (InputError and subclasses) and
exhausted capability (ResourceError, CapabilityError). The CLI maps the first
family to exit code 2 and the second to exit code 3.
"""

__all__ = [
    "SimadjustError",
    "InputError",
    "ShapeError",
    "DomainError",
    "ContractError",
    "ResourceError",
    "CapabilityError",
]


class SimadjustError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SimadjustError):
    """Malformed or inconsistent user input (bad counts, unknown identifier)."""


class ShapeError(InputError):
    """Table shape does not meet a requirement (e.g. square needed)."""


class DomainError(InputError):
    """Value outside the defined domain of an operation (e.g. N < 2 for pairs)."""


class ContractError(SimadjustError):
    """A declared precondition of a composed object is violated at runtime."""


class ResourceError(SimadjustError):
    """A configured budget (enumeration size, sample cap) would be exceeded."""


class CapabilityError(SimadjustError):
    """The requested combination of options is not supported (e.g. exact Monte Carlo)."""
