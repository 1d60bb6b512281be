"""Thin scripting client for the corrbench toolkit.

Drives the CLI as a subprocess and exposes its JSON documents (manifests,
reports, score cells) as read-only in-memory views for training and
evaluation loops. The client never computes metrics: every number it returns
is traceable to a field of a document the toolkit wrote.
"""

from .client import (
    ManifestView,
    ReportView,
    SetupError,
    ToolkitError,
    ToolkitHandle,
    VersionError,
    build_report,
    corrupt_dataset,
    evaluate,
    load_report,
)

__version__ = "0.1.0"

__all__ = [
    "ManifestView",
    "ReportView",
    "SetupError",
    "ToolkitError",
    "ToolkitHandle",
    "VersionError",
    "build_report",
    "corrupt_dataset",
    "evaluate",
    "load_report",
    "__version__",
]
