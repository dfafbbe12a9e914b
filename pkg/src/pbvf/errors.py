"""Exception types shared across the package."""


class PbvfError(Exception):
    """Base class for all package errors."""


class ConfigError(PbvfError):
    """Invalid or inconsistent run configuration."""


class NumericError(PbvfError):
    """Numerical failure: non-finite values, shape mismatches, failed solves."""


class ProtocolError(PbvfError):
    """Environment or buffer API misuse (e.g. stepping a finished episode)."""


class DegenerateRatioError(NumericError):
    """Importance ratio undefined: behavioral density vanishes at a stored action."""


class EnumerationBoundError(PbvfError):
    """Finite MDP too large for exact enumeration."""


class DataFormatError(PbvfError):
    """Artifact file malformed: wrong header, missing rows, unparsable values."""


class RunError(PbvfError):
    """One or more runs of an experiment failed after all seeds completed."""
