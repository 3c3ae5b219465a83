"""Exception types raised by the prognosis engine.

Every error that callers are expected to branch on gets its own class;
they all derive from :class:`PrognosError` so a CLI can catch the lot.
"""


class PrognosError(Exception):
    """Base class for all engine errors."""


class FrameFormatError(PrognosError):
    """Malformed XYZM header or structurally invalid frame data."""


class TruncationError(FrameFormatError):
    """Frame byte stream holds a different number of data lines than declared."""


class FrameParseError(FrameFormatError):
    """A data line failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class WindowError(PrognosError):
    """Observation window falls outside the frame or is empty."""


class SequenceOrderError(PrognosError):
    """Frame sequence is not ordered by time index."""


class DegenerateInputError(PrognosError):
    """Too few valid points for a pairwise operation."""


class DegeneratePairError(PrognosError):
    """Pair normalization denominator is below the configured guard."""


class NoRealDatumError(PrognosError):
    """Pair datum quadratic has no real root; pair dropped from the fit."""


class DatumUnavailableError(PrognosError):
    """No pair datum could be fitted for a dimension."""


class RankUnavailableError(PrognosError):
    """Every pair of every point was degenerate; no objective rank exists."""


class AlignmentError(PrognosError):
    """Two frames of an analyzed pair do not share the same valid-point set."""


class RootSolveError(PrognosError):
    """Length-scale equation produced a non-finite ratio."""


class MixityUnavailableError(PrognosError):
    """No mixity candidate produced a finite curvature at a point."""


class ZoomOutUnavailableError(PrognosError):
    """Observation window is too small for the aggregation pyramid."""


class InsufficientFramesError(PrognosError):
    """Frame directory holds fewer frames than the stride requires."""


class PredictionAfterFailureError(PrognosError):
    """Predicted frame lies after the actual failure frame (a miss)."""


class RunMismatchError(PrognosError):
    """Report and manifest carry different run identifiers."""


class ScenarioError(PrognosError):
    """Synthetic scenario file is invalid or inconsistent."""
