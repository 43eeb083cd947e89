"""Exception types shared across the package.

Every error raised on purpose derives from DemoCensusError so callers can
catch the package's failures without swallowing programming mistakes.
"""


class DemoCensusError(Exception):
    """Base class for all deliberate failures in this package."""


class ConflictingConstraint(DemoCensusError):
    """A targeting spec would include and exclude the same dimension."""


class UnmappedCategory(DemoCensusError):
    """A source category has no mapping entry for the requested side."""


class RegistryError(DemoCensusError):
    """A registry file is malformed or fails validation."""


class GeographyUnknown(DemoCensusError):
    """A geography is not known to the registry or the backend."""


class FixtureMiss(DemoCensusError):
    """A reach query has no recorded fixture."""


class FloorViolation(DemoCensusError):
    """An operation would store a reach count below the privacy floor."""


class MalformedTable(DemoCensusError):
    """A census extract violates its declared structure."""


class UnsupportedGranularity(DemoCensusError):
    """A baseline exists only at a coarser geographic level."""


class DegenerateVariance(DemoCensusError):
    """Correlation input has zero variance on at least one side."""


class DomainError(DemoCensusError):
    """An input lies outside a statistical operation's domain."""


class ZeroPlatformShare(DemoCensusError):
    """A correction factor would divide by a zero platform share."""


class NegativeResidual(DemoCensusError):
    """Residual derivation produced a negative count."""


class MissingStratumCF(DemoCensusError):
    """An audience stratum has no matching correction factor."""


class MissingGeography(DemoCensusError):
    """A coverage computation is missing one side's total for a geography."""
