"""Exception types shared across the package.

The CLI maps these onto process exit codes: InputError -> 2,
NumericalFailure -> 3.  A stuck MCMC chain is a status flag, not an
exception (exit code 4, success-with-status).
"""


class DvinetsError(Exception):
    """Base class for package errors."""


class InputError(DvinetsError):
    """Invalid user input: malformed data, bad configuration, unknown category."""


class UnknownCategoryError(InputError):
    """An ordinal value absent from the fitted margin support."""


class NumericalFailure(DvinetsError):
    """A numerical routine failed to converge or produced non-finite values.

    Carries enough context (``info`` dict) to reproduce the failing call.
    """

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = dict(info)
