"""Exception hierarchy shared across the package.

Every failure mode the library reports deliberately gets its own class so
callers (and the CLI exit-code mapping) can tell them apart.
"""


class QuenchError(Exception):
    """Base class for all qquench errors."""


class ZeroVectorError(QuenchError):
    """An all-zero amplitude vector where a normalizable state is required."""


class DimensionMismatchError(QuenchError):
    """Operands live on different basis grids."""


class NonFiniteInputError(QuenchError):
    """NaN or Inf encountered in numeric input."""


class UnknownWaveformError(QuenchError):
    """Requested builtin waveform name is not registered."""


class IndexOutOfRangeError(QuenchError):
    """Bin or frequency index outside the grid."""


class DegenerateBaselineError(QuenchError):
    """Post-selection baseline probability is zero or below the floor.

    Signals that the post-selection state is (nearly) orthogonal to the
    measured state, so response factors are undefined.
    """


class SingularDepthError(QuenchError):
    """Quench depth too close to 0 (mod 2pi) for the general inversion."""


class IncompleteDepthsError(QuenchError):
    """Response map does not contain the +/-theta depth pair reconstruction needs."""
