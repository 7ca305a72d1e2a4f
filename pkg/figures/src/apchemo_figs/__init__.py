"""Figure rendering for the chemotaxis solver CSV outputs."""

from .csv_io import SchemaError, read_table
from .render import KINDS, FigureSpec, render_figure, render_to_file

__all__ = ["SchemaError", "read_table", "KINDS", "FigureSpec",
           "render_figure", "render_to_file"]
