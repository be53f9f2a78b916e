"""Figures rendered from edgesim harness CSV output."""

from .render import FigureSpec, SchemaMismatch, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaMismatch", "render", "__version__"]
