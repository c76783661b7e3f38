"""Exception types shared across the package."""


class ThreatGraphError(Exception):
    """Base class for all package errors."""


class DuplicateNode(ThreatGraphError):
    pass


class InvalidNode(ThreatGraphError):
    pass


class UnknownNode(ThreatGraphError):
    pass


class LayerViolation(ThreatGraphError):
    pass


class GraphFrozen(ThreatGraphError):
    pass


class GraphNotFrozen(ThreatGraphError):
    pass


class MalformedInput(ThreatGraphError):
    """Raised by parsers; carries a location hint (byte offset or element path)."""

    def __init__(self, message, where=None):
        self.where = where
        if where is not None:
            message = f"{message} (at {where})"
        super().__init__(message)


class UnsupportedVersion(ThreatGraphError):
    pass


class NoPositivePairs(ThreatGraphError):
    pass


class EmptyCorpus(ThreatGraphError):
    pass


class DimensionMismatch(ThreatGraphError):
    pass


class DegenerateData(ThreatGraphError):
    pass


class SingleClass(ThreatGraphError):
    pass
