"""Exporter error hierarchy.

ValidationError covers bad job parameters (usage, exit 2); ExportError covers
failures while loading checkpoints or datasets or writing files (exit 1).
"""


class ExporterError(Exception):
    pass


class ValidationError(ExporterError):
    pass


class ExportError(ExporterError):
    pass
