"""Tables, checkpoints and fit reports."""

from .tables import write_table, read_table, read_header, read_pairs_table
from .checkpoint import save_checkpoint, load_checkpoint, FORMAT_VERSION
from .reports import write_fit_report, read_fit_report, format_fit_report, parse_fit_report

__all__ = [
    "write_table",
    "read_table",
    "read_header",
    "read_pairs_table",
    "save_checkpoint",
    "load_checkpoint",
    "FORMAT_VERSION",
    "write_fit_report",
    "read_fit_report",
    "format_fit_report",
    "parse_fit_report",
]
