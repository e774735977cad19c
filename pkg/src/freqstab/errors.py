"""Exception types raised across the package."""


class FreqstabError(Exception):
    """Base class for every package-specific error."""


class InvalidParameterError(FreqstabError, ValueError):
    """A physical parameter violates its admissible range."""


class OutOfRangeError(FreqstabError, ValueError):
    """A query time falls outside the sampled record."""


class InsufficientSamplesError(FreqstabError, ValueError):
    """Too few samples inside the requested window for a fit."""


class DegenerateWeightsError(FreqstabError, ValueError):
    """Response-split weights are all zero or otherwise unusable."""


class NoOnsetError(FreqstabError):
    """No sample of the power record clears the noise floor."""


class AmbiguousClassificationError(FreqstabError):
    """Both classification branches fired on the same evidence."""

    def __init__(self, message: str, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class InfeasibleError(FreqstabError, ValueError):
    """The requested operating point has no physical solution."""


class NoConvergenceError(FreqstabError):
    """An iterative solve failed to bracket or converge on a root."""


class UnstableIntegrationError(FreqstabError):
    """The simulated frequency deviation left the trusted range."""


class SchemaError(FreqstabError, ValueError):
    """Structurally invalid data (lengths, ordering, duplicate keys)."""


class ParseError(FreqstabError, ValueError):
    """Malformed input file; carries the offending row and column."""

    def __init__(self, message: str, row=None, column=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.column = column
