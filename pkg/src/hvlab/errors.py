"""Exception types shared by every module."""


class HVLabError(Exception):
    """Base class for all errors raised by hvlab."""


class InputError(HVLabError, ValueError):
    """Malformed input: invalid distributions, undefined variables, bad files."""


class ConditioningError(HVLabError, ZeroDivisionError):
    """Conditioning on an event of probability zero."""


class RefusalError(HVLabError):
    """A precondition check failed; ``check`` names the failing check."""

    def __init__(self, check: str, message: str):
        super().__init__(f"{check}: {message}")
        self.check = check
