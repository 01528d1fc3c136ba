"""Exception types shared across the toolkit."""


class SegAuditError(Exception):
    """Base class for all toolkit errors."""


class FormatError(SegAuditError):
    """File container or image encoding is not what the reader expects."""


class ShapeError(SegAuditError):
    """Array dimensions disagree with each other or with the manifest."""


class ValidationError(SegAuditError):
    """Values violate a documented invariant (range, simplex sum, ...)."""


class IoError(SegAuditError):
    """Filesystem read or write failure."""


class ClassNotPresentError(SegAuditError):
    """An injection targeted a class with no pixels in the mask."""


class DegenerateShiftError(SegAuditError):
    """A morphological perturbation left the mask unchanged."""


class InfeasiblePlanError(SegAuditError):
    """A corruption plan cannot be satisfied by the dataset."""


class UndefinedMetricError(SegAuditError):
    """A ranking metric is undefined for the given label mix."""


class JoinError(SegAuditError):
    """Score report and error log do not describe the same set of images."""
