"""Figure rendering for simulation experiment CSVs."""

from .render import SchemaError, render_figure, render_figures

__version__ = "0.1.0"
