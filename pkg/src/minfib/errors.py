"""Exception types shared across the package."""


class MinfibError(Exception):
    pass


class ValidationError(MinfibError):
    """Input data violates a structural law (simplicial identity, naturality, ...)."""


class TruncationError(MinfibError):
    """A dimension beyond the carried truncation was requested."""


class UnsupportedError(MinfibError):
    """The operation is not available for this kind of input (e.g. a non-free diagram)."""


class BudgetExhausted(MinfibError):
    """A search hit its node cap before reaching a verdict.

    Distinct from a refutation: callers must not read this as "no solution".
    """

    def __init__(self, limit, where=""):
        self.limit = limit
        self.where = where
        super().__init__(f"search budget of {limit} nodes exhausted{' in ' + where if where else ''}")


class Budget:
    """Node counter shared by one search (or a family of searches)."""

    def __init__(self, limit=None, where=""):
        self.limit = limit
        self.used = 0
        self.where = where

    def tick(self, n=1):
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise BudgetExhausted(self.limit, self.where)

    @classmethod
    def of(cls, budget, where=""):
        if isinstance(budget, Budget):
            return budget
        return cls(budget, where)
