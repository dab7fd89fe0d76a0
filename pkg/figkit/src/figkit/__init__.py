"""Figure rendering for powersense CSV outputs."""

from .render import KINDS, FigureSpec, RenderReport, SchemaError, render

__all__ = ["KINDS", "FigureSpec", "RenderReport", "SchemaError", "render"]
