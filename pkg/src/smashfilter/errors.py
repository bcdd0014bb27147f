"""Exception hierarchy.

Numeric problems (bad dimensions, singular denominators) derive from
``NumericError``; file problems derive from ``FormatError``.  The CLI maps
the two families onto distinct exit codes.
"""


class SmashError(Exception):
    """Base class for every error raised by this package."""


class NumericError(SmashError, ValueError):
    pass


class DimensionError(NumericError):
    pass


class SizingError(DimensionError):
    pass


class RankError(DimensionError):
    pass


class InsufficientFramesError(DimensionError):
    pass


class OrderError(NumericError):
    """Temporal-derivative order of a measurement stream is not what the caller needs."""


class ConjugateSymmetryError(NumericError):
    pass


class SingularDenominatorError(NumericError):
    def __init__(self, bin_index):
        self.bin_index = tuple(int(i) for i in bin_index)
        super().__init__(
            f"MACH denominator alpha*C + beta*D_x + gamma*S_x vanishes at frequency bin {self.bin_index}"
        )


class ArityError(NumericError):
    pass


class InvertibilityError(NumericError):
    pass


class PoolingResolutionError(DimensionError):
    pass


class DegenerateLabelsError(NumericError):
    pass


class AlignmentError(NumericError):
    pass


class FormatError(SmashError):
    pass


class TruncationError(FormatError):
    def __init__(self, what, expected, actual):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: truncated payload, expected {expected} bytes, got {actual}")
