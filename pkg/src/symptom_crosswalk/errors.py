"""Exception types raised by the crosswalk engine."""


class CrosswalkError(Exception):
    """Base class for all engine errors."""


class FormatError(CrosswalkError):
    """Malformed input document (bad JSON/CSV structure, missing fields)."""


class ValidationError(CrosswalkError):
    """Well-formed input that violates a domain invariant."""


class EmbeddingServiceError(CrosswalkError):
    """Embedding service transport failure or contract violation."""


class DisjointnessError(CrosswalkError):
    """Participant overlap between training/calibration and test sets."""


class VersionError(CrosswalkError):
    """Model artifact written by an incompatible engine version."""
