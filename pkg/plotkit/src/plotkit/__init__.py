"""Rendering of wavecurve benchmark CSV artifacts into figures."""

from .spec import FigureSpec, PlotkitError, load_spec
from .render import render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "PlotkitError", "load_spec", "render", "__version__"]
