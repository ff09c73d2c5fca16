"""Figure rendering for magnomech sweep CSV panels.

Consumes only the CSV and metadata files the magnomech CLI writes; never
imports the numeric package.
"""

__version__ = "0.1.0"

from .panels import PanelSpec, SchemaMismatch, Table, read_table
from .render import render, render_all, RenderReport

__all__ = [
    "__version__",
    "PanelSpec",
    "SchemaMismatch",
    "Table",
    "read_table",
    "render",
    "render_all",
    "RenderReport",
]
