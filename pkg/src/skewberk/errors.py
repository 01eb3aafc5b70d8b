"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SkewBerkError(Exception):
    """Base class for all errors raised by skewberk."""


class SeriesParseError(SkewBerkError, ValueError):
    """Malformed series or point text.  ``pos`` is the 0-based offset."""

    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        pointer = " " * pos + "^"
        super().__init__(f"{message} at position {pos}\n  {text}\n  {pointer}")


class IndeterminateOrder(SkewBerkError):
    """The order of a truncated series cannot be decided from its known terms."""


class InsufficientPrecision(SkewBerkError):
    """Input truncation is too coarse for the requested output precision."""


class RootsOfUnityUnavailable(SkewBerkError):
    """Exact mode needs a root of unity outside the Gaussian rationals."""


class SplittingFieldRequired(SkewBerkError):
    """A characteristic polynomial does not split over the coefficient field."""


class NotType2(SkewBerkError):
    """The operation only makes sense at a type-2 point."""


class InvalidRoot(SkewBerkError):
    """The requested root ball does not satisfy f(B0) strictly containing B0."""


class NoCover(SkewBerkError):
    """The map has a singleton invariant set; there is no ball cover to build."""


class CriticalInK(SkewBerkError):
    """Some critical branch does not escape, so the Markov coding is unavailable."""


class BudgetExceeded(SkewBerkError):
    """An iteration budget ran out before the question was settled."""


class NoPreimageInBall(SkewBerkError):
    """Pullback found no rigid preimage in the prescribed ball."""


class DegenerateEigenspace(SkewBerkError):
    """The eigenspace of the transition matrix for eigenvalue c is not a line."""


class UnknownVertex(SkewBerkError, KeyError):
    """A word refers to a vertex that is not in the Markov graph."""


class HypothesisFailed(SkewBerkError):
    """A theorem hypothesis needed by the computation does not hold."""


class NotAdmissible(SkewBerkError):
    """A word uses a transition that is not an edge of the Markov graph."""
