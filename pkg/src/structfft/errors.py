"""Exception hierarchy shared by all structfft modules."""


class StructFFTError(Exception):
    """Base class for all structfft errors."""


class InvalidInputError(StructFFTError, ValueError):
    """Malformed input: bad lengths, indices out of range, schema violations."""


class ContractViolationError(StructFFTError, RuntimeError):
    """A documented precondition does not hold (e.g. part-homogeneity)."""


class BudgetExceededError(StructFFTError, RuntimeError):
    """A search or size budget was exhausted before an exact answer was found."""
