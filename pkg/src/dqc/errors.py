"""Exception types shared across the package."""


class DQCError(Exception):
    """Base class for all package errors."""


class InputShapeError(DQCError, ValueError):
    pass


class NoWitnessError(DQCError, ValueError):
    pass


class ParseError(DQCError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(DQCError, ValueError):
    pass


class BudgetExceeded(DQCError, RuntimeError):
    """An exhaustive procedure needed more work than the configured budget."""

    def __init__(self, what, budget, required=None):
        self.budget = budget
        self.required = required
        msg = f"{what}: budget of {budget} evaluations exceeded"
        if required is not None:
            msg += f" (needs up to {required})"
        super().__init__(msg)


class VerifierContractError(DQCError, RuntimeError):
    """A verifier repeated a query, left the index space, or overran its bound."""


class InternalConsistencyError(DQCError, AssertionError):
    """A construction that is guaranteed correct produced a wrong result."""


class CompileError(DQCError, ValueError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class ConstructionFailure(DQCError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class CorruptTableError(DQCError, LookupError):
    pass
