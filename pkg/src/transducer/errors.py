"""Exception and warning types raised by the transducer toolkit."""


class TransducerError(Exception):
    """Base class for all domain errors."""


class RankDeficient(TransducerError):
    """A full-rank 2x2 matrix was required."""


class NotSymplectic(TransducerError):
    """Input fails the canonical commutation checks.

    ``residual`` carries the largest violation found.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class NoTransmission(TransducerError):
    """Class [[0,2]]: the two modes never exchange quadratures."""


class Uncorrectable(TransducerError):
    """No correction protocol exists for the given transducer pair."""


class ZeroTransmissionPath(TransducerError):
    """A transmission amplitude needed for destructive interference is zero."""


class AlreadyMatched(TransducerError):
    """The reflection to be cancelled already vanishes; no gain is needed."""


class DegenerateStrengths(TransducerError):
    """No nonzero pair of gains cancels the merged QND strength."""


class OverdampedUnsupported(TransducerError):
    """Loss rate at or beyond the critical value 4g."""


class GainDetected(TransducerError):
    """A dissipative evolution reported a singular value above one."""


class ConsistencyError(TransducerError):
    """An internal numerical invariant was violated."""


class TruncationTooSmall(TransducerError):
    """Fock-space truncation leaks more norm than allowed.

    ``suggested`` is a truncation that satisfies the leakage bound.
    """

    def __init__(self, message, suggested=None):
        super().__init__(message)
        self.suggested = suggested


class BoundaryClassWarning(UserWarning):
    """A [[2,2]] transducer sits within tolerance of a class boundary."""
