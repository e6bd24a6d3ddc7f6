"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: InputError -> 2, AnalysisError -> 1,
anything else -> 3.
"""


class IcsguardError(Exception):
    """Base class for all errors raised by this package."""


class InputError(IcsguardError):
    """The supplied model, file, or option is unusable."""


class AnalysisError(IcsguardError):
    """The model is well-formed but the requested analysis has no answer."""
