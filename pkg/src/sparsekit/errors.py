"""Exception types shared across the toolkit."""


class SparsekitError(Exception):
    """Base class for all sparsekit errors."""


class ZeroColumn(SparsekitError):
    """A matrix column has (numerically) zero norm and cannot be normalized."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"column {column} has norm below 1e-12")


class KTooLarge(SparsekitError):
    """A requested sparsity level exceeds what the problem dimensions allow."""


class RankDeficient(SparsekitError):
    """Selected dictionary columns are linearly dependent at the working tolerance."""


class BudgetExceeded(SparsekitError):
    """Exhaustive enumeration would exceed the configured subset budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(f"enumeration needs {required} subsets, budget is {budget}")


class EmptyGroup(SparsekitError):
    """Aggregation was asked to summarize an empty record set."""
