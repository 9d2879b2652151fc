"""Publication figures for lineage-analysis report bundles.

Presentation layer only: consumes the report JSON produced by the
analysis pipeline and renders its nine figure kinds; all statistics
arrive precomputed.
"""

__version__ = "0.1.0"

from .bundle import FIGURE_KINDS, REQUIRED_TABLES, SchemaError, load_bundle, validate
from .render import FigureSpec, draw, render

__all__ = [
    "__version__",
    "FIGURE_KINDS",
    "REQUIRED_TABLES",
    "FigureSpec",
    "SchemaError",
    "draw",
    "load_bundle",
    "render",
    "validate",
]
