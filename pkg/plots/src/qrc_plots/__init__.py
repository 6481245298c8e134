"""Figure rendering for qrc-lab experiment CSV outputs."""

from .figspec import FigureSpec, SpecError
from .render import SchemaError, render, render_figure

__version__ = "0.1.0"
