"""Exception hierarchy shared by every layer of the engine."""


class ToposError(Exception):
    """Base class for all errors raised by toposmodal."""


class CycleError(ToposError, ValueError):
    pass


class UnknownObject(ToposError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotBelow(ToposError, ValueError):
    pass


class BaseMismatch(ToposError, ValueError):
    pass


class StageMismatch(ToposError, ValueError):
    pass


class PresheafError(ToposError, ValueError):
    """A presheaf failed validation; ``violations`` lists what went wrong."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class InvalidSubobject(ToposError, ValueError):
    pass


class NotNatural(ToposError, ValueError):
    pass


class UnknownElement(ToposError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class BudgetExceeded(ToposError, RuntimeError):
    pass


class EmptyWorld(ToposError, ValueError):
    pass


class WrongBase(ToposError, ValueError):
    pass


class ParseError(ToposError, ValueError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SortError(ToposError, TypeError):
    pass


class AmbiguousModality(ToposError, ValueError):
    pass


class UnknownAtom(ToposError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownSort(ToposError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnboundVariable(ToposError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
