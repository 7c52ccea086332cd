"""Exception hierarchy shared by every solver.

The CLI maps the three families onto exit codes: ``ParseError`` -> 2,
``BudgetExceededError`` -> 3, everything else that signals a failed check -> 1.
"""


class LssdError(Exception):
    """Base class for all solver errors"""


class ValidationError(LssdError, ValueError):
    """An input object violates one of its invariants"""


class NegativeEntryError(ValidationError):
    def __init__(self, index, value):
        self.index = tuple(index)
        self.value = value
        super().__init__(f"negative entry {value} at index {self.index}")


class NotNormalizedError(ValidationError):
    def __init__(self, total, where="table"):
        self.total = total
        self.where = where
        super().__init__(f"{where} sums to {total}, expected 1")


class ShapeMismatchError(ValidationError):
    pass


class AlphaOutOfRangeError(ValidationError):
    def __init__(self, alpha):
        self.alpha = alpha
        super().__init__(f"alpha must satisfy 0 <= alpha <= 1/2, got {alpha}")


class PartyCountMismatchError(ValidationError):
    pass


class KOutOfRangeError(ValidationError):
    pass


class SignalingError(ValidationError):
    pass


class NotHermitianError(ValidationError):
    pass


class InvalidPovmError(ValidationError):
    pass


class DimensionTooLargeError(ValidationError):
    pass


class NotSymmetricError(ValidationError):
    pass


class EmptyHypergraphError(ValidationError):
    pass


class ParseError(LssdError):
    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class BudgetExceededError(LssdError):
    def __init__(self, what, required, budget):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(f"{what} requires {required} evaluations, budget is {budget}")


class InfeasibleError(LssdError):
    pass


class UnboundedError(LssdError):
    pass


class CertificateInvalidError(LssdError):
    def __init__(self, step, detail=""):
        self.step = step
        self.detail = detail
        super().__init__(f"certificate check failed at {step}" + (f": {detail}" if detail else ""))
