"""Service layer entry points for santalab."""

from .file_service import FileService
from .report_service import ReportService, format_value

__all__ = ["FileService", "ReportService", "format_value"]
