"""Exception types shared across the toolkit."""


class PursuitError(Exception):
    """Base class for all toolkit-specific errors."""


class ZeroColumn(PursuitError):
    """A matrix column has (near-)zero norm and cannot be normalized."""

    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"column {self.index} has zero norm")


class RankDeficient(PursuitError):
    """A least-squares support is rank deficient at the working tolerance.

    Attributes
    ----------
    support : tuple of int
        The offending column index set, in caller order.
    rank : int
        Effective rank detected by the pivoted factorization.
    independent : tuple of int
        A maximal independent subset of ``support`` suggested by pivoting.
    """

    def __init__(self, support, rank, independent=()):
        self.support = tuple(int(i) for i in support)
        self.rank = int(rank)
        self.independent = tuple(int(i) for i in independent)
        super().__init__(
            f"support {self.support} has effective rank {self.rank} "
            f"< {len(self.support)}"
        )


class NearCollinearPair(PursuitError):
    """A column pair is too close to collinear for the closed-form projection."""

    def __init__(self, i, j, gram):
        self.i = int(i)
        self.j = int(j)
        self.gram = float(gram)
        super().__init__(
            f"columns {self.i} and {self.j} are near collinear "
            f"(inner product {self.gram:.17g})"
        )


class NoAdmissiblePair(PursuitError):
    """No column pair is admissible: too few free columns or all near collinear."""


class PreconditionViolated(PursuitError):
    """Arguments fall outside a formula's domain of validity."""


class EnumerationGuard(PursuitError):
    """Exhaustive support enumeration would exceed the configured budget."""

    def __init__(self, n, s, count, limit):
        self.n = int(n)
        self.s = int(s)
        self.count = int(count)
        self.limit = int(limit)
        super().__init__(
            f"C({self.n},{self.s}) = {self.count} supports exceeds "
            f"the enumeration budget {self.limit}"
        )
