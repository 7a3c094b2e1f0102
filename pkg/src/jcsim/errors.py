"""Exception types shared across the package.

Everything derives from JcsimError so callers can catch the whole family
with one clause. Names describe the failure, not the caller.
"""


class JcsimError(Exception):
    pass


class ParameterError(JcsimError):
    """A physical parameter is out of its admissible range."""


class DimensionMismatch(JcsimError):
    """Operands built on different truncated spaces."""


class TruncationInsufficient(JcsimError):
    """Photon-number cutoff too low: population piles up at the boundary."""


class SolverSingular(JcsimError):
    """Linear solve hit a numerically rank-deficient system."""


class StepRejected(JcsimError):
    """Time integrator could not meet the local error tolerance."""


class GridTooSmall(JcsimError):
    """Phase-space grid clips significant weight at its boundary."""


class RecurrenceOverflow(JcsimError):
    """Polynomial recurrence left the representable floating range."""


class NoRoot(JcsimError):
    """Root bracketing found no sign change in the search interval."""


class ResonanceSingular(JcsimError):
    """Formula undefined at zero detuning; use the resonant branch instead."""


class CouplingTooWeak(JcsimError):
    """Requested regime needs stronger coupling relative to the losses."""


class BelowThreshold(JcsimError):
    pass


class AboveThreshold(JcsimError):
    pass


class AboveCollapse(JcsimError):
    """Drive beyond the point where the quasi-energy ladder collapses."""


class StepUnderflow(JcsimError):
    """Adaptive subdivision pushed the step below the resolvable scale."""


class ScheduleMismatch(JcsimError):
    """Trajectory records with different schedules cannot be averaged."""


class BandsOverlap(JcsimError):
    """Dwell bands must be disjoint intervals."""


class NotBimodal(JcsimError):
    """Distribution shows a single peak where two were required."""


class TruncationExplosion(JcsimError):
    """Automatic cutoff growth exceeded the hard cap; parameters suspect."""


class ConfigError(JcsimError):
    """Scenario configuration is malformed or contains unknown keys."""
