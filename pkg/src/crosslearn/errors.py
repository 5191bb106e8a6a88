"""Exception hierarchy shared across the package."""


class CrossLearnError(Exception):
    """Base class for all package errors."""


class ParseError(CrossLearnError):
    """Malformed input file (bad row, wrong arity, non-numeric cell)."""


class ValidationError(CrossLearnError):
    """A precondition on inputs or configuration was violated."""


class NumericError(CrossLearnError):
    """A numeric procedure failed (divergence, non-finite values, no usable folds)."""
