"""Figure renderer for qdshield datasets."""

__version__ = "0.1.0"

from .render import FIGURE_IDS, FigureSpec, RenderError, default_spec, render

__all__ = ["FIGURE_IDS", "FigureSpec", "RenderError", "default_spec", "render"]
