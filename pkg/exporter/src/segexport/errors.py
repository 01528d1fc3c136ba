"""Exporter exception types."""


class ExportError(Exception):
    """Base class for exporter errors."""


class ConfigError(ExportError):
    """Export configuration is inconsistent or incomplete."""


class ExportShapeError(ExportError):
    """A model produced output of the wrong shape."""
