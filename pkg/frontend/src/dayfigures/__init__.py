"""Render figures from daycourse pipeline artifacts."""

__version__ = "0.1.0"

from .colors import SENTIMENT_COLORS
from .figures import KINDS, FigureSpec, render
from .io import RenderInputError

__all__ = ["SENTIMENT_COLORS", "KINDS", "FigureSpec", "render", "RenderInputError"]
