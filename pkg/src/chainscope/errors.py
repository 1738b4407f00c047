"""Exception types shared across the package."""
from __future__ import annotations


class ChainscopeError(Exception):
    """Base class for all package-specific failures."""


class NDViolation(ChainscopeError):
    """A located zero of f has |f'| at or below the degeneracy tolerance."""

    def __init__(self, location: float, slope: float, tol: float):
        self.location = location
        self.slope = slope
        self.tol = tol
        super().__init__(
            f"degenerate zero of f at u={location!r}: |f'|={abs(slope):.3e} <= {tol:.3e}"
        )


class TangencySuspected(ChainscopeError):
    """f appears to touch zero without a sign change at the scan resolution."""

    def __init__(self, location: float, value: float):
        self.location = location
        self.value = value
        super().__init__(
            f"f touches zero near u={location!r} (|f|={abs(value):.3e}) without a sign change"
        )


class WindowTooSmall(ChainscopeError):
    """Analysis window edge energy does not dominate all saddle energies."""


class HitsSaddle(ChainscopeError):
    """Level set through the requested turning point contains an equilibrium."""


class NoReturn(ChainscopeError):
    """The potential never returns to the starting level inside the window."""


class NoStableLimit(ChainscopeError):
    """The scalar ODE trajectory left the analysis window before settling."""


class Blowup(ChainscopeError):
    """Boundary ODE value left the analysis window."""


class NonFinite(ChainscopeError):
    """A PDE value left the guard window or became non-finite."""

    def __init__(self, t: float, x: float, value: float):
        self.t = t
        self.x = x
        self.value = value
        super().__init__(f"solution value {value!r} outside guard window at x={x!r}, t={t!r}")


class EmptyOverlap(ChainscopeError):
    """Reflection point set does not intersect the grid."""


class AllBelowTol(ChainscopeError):
    """Every node is inside the deadband; the zero count is undefined."""


class TailTooShort(ChainscopeError):
    """Not enough tail snapshots for a limit-set estimate."""


class UnsettledEstimate(ChainscopeError):
    """Operation requires a settled limit-set estimate."""


class Straddle(ChainscopeError):
    """Trajectory points straddle a chain; no single annulus contains them."""

    def __init__(self, points):
        self.points = list(points)
        super().__init__(f"trajectory straddles a chain at {len(self.points)} point(s)")


class ConfigError(ChainscopeError):
    """Scenario configuration is invalid; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
