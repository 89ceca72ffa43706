"""Exception hierarchy shared by the library and the command line front end.

The CLI maps these onto exit codes: ``InputError`` -> 2,
``InvariantViolation`` -> 3.
"""


class ExpDecompError(Exception):
    """Base class for all library errors."""


class InputError(ExpDecompError, ValueError):
    """Malformed input or a violated precondition.

    ``line`` carries the 1-based line number when the error comes from
    parsing an edge-list file.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InstanceTooSmall(InputError):
    """The active split-node set is below the source/target-set minimum."""


class InvariantViolation(ExpDecompError, RuntimeError):
    """An internal invariant or a post-condition failed at runtime."""


class TrimContractError(InvariantViolation):
    """The trimming post-conditions did not hold for the given input."""
