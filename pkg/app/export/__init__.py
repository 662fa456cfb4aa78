"""Result export: CSV, JSON and plot scripts."""

from .writer import ResultWriter, format_float, render_csv, write_outputs

__all__ = ["ResultWriter", "format_float", "render_csv", "write_outputs"]
