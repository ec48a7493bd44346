"""figrender: deterministic SVG plots from figure-data CSV bundles."""

from .render import FigureSpec, render, render_bundle
from .schema import FAMILIES, SchemaError

__version__ = "0.1.0"
