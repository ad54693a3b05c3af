"""Exception hierarchy shared by all modules.

Every exception carries a short machine-readable ``code`` which the CLI maps to
an exit status.
"""


class FactornormError(Exception):
    code = "E_INTERNAL"


class ContractError(FactornormError, ValueError):
    """A precondition on the inputs does not hold."""

    code = "E_PRECONDITION"


class LimitError(ContractError):
    """Input is beyond the size an exact routine accepts."""

    code = "E_LIMIT"


class NumericalError(FactornormError, ArithmeticError):
    """A post-hoc numerical verification failed."""

    code = "E_NUMERICAL"

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = dict(residuals or {})


class InvariantViolation(FactornormError, RuntimeError):
    """Something a lemma guarantees did not happen (usually a broken factorization)."""

    code = "E_INVARIANT"


class PartialResultError(FactornormError):
    """An iterative routine hit its guard; ``best`` holds the best valid result found."""

    code = "E_PARTIAL"

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace


class FormatError(FactornormError, ValueError):
    code = "E_PARSE"

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column
