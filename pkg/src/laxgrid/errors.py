"""Error taxonomy shared by every laxgrid module.

Every failure a caller can act on is a named subclass of LaxgridError, so the
CLI can map exceptions to machine-readable report entries and exit codes.
"""


class LaxgridError(Exception):
    """Base class for all laxgrid errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class CapacityExceeded(LaxgridError):
    """A refined grid or joined partition would exceed the bit budget."""


class GridMismatch(LaxgridError):
    """Two operands live on different grids or refinement levels."""


class NoPerfectMatching(LaxgridError):
    """The positive-support overlap graph violates Hall's condition.

    Usually means the sampling density is too coarse; raise it and retry.
    """


class NotCyclic(LaxgridError):
    """A single-cycle permutation was required."""


class OddOrder(LaxgridError):
    """An even number of cells was required."""


class NotCoprime(LaxgridError):
    """Two heights/lengths were required to be coprime."""


class TooSmall(LaxgridError):
    """Integer argument below the feasible threshold (k < p*q')."""


class CycleTooShort(LaxgridError):
    """A cycle of the permutation is shorter than the requested column/tower."""


class EqualSizeInfeasible(LaxgridError):
    """Equal-measure column bases requested but the integer system has no solution."""


class GapTooSmall(LaxgridError):
    """Separation scale exceeds the gap between Markov components."""


class UnsupportedGeometry(LaxgridError):
    """Rectangle model with non-axis-aligned branch output."""


class PathsIntersect(LaxgridError):
    """Point-moving segments intersect or come too close to one another."""


class PointsOnBoundary(LaxgridError):
    """Point-moving data touches the boundary of the square (supports must stay inside)."""


class ConfigError(LaxgridError):
    """Malformed experiment configuration."""


class IoError(LaxgridError):
    """Report or CSV emission failed."""


class DomainError(LaxgridError):
    """A point lies outside the unit cube."""


class NoCycle(LaxgridError):
    """No Hamiltonian cell cycle exists for this grid (n=1 cube with q > 2)."""


class NotAPartition(LaxgridError):
    """Parts overlap or fail to cover the space at the refined resolution."""
