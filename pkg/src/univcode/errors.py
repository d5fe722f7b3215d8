"""Exception hierarchy shared by all modules."""


class UnivCodeError(Exception):
    """Base class for every error raised by this package."""


class BudgetExceeded(UnivCodeError):
    """A configured iteration, scan or size budget ran out."""


class NumeralBudgetError(BudgetExceeded):
    """A symbolic numeral would have to be materialized."""


class CacheError(UnivCodeError):
    """A sigma cache file is corrupt or has the wrong version."""


class EvaluationError(UnivCodeError):
    """The user function could not be evaluated (division by zero, result 0, ...)."""


class DSLSyntaxError(UnivCodeError):
    def __init__(self, message, line, column, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at line {line}, column {column}{detail}")


class UnknownOrbitError(UnivCodeError):
    """The orbit could not be classified as cyclic or acyclic within budget."""


class ClassificationError(UnivCodeError):
    """A source received two different targets; the component was misclassified."""


class InjectivityError(UnivCodeError):
    """Two sources were given the same target."""
