"""Rendering of uwisac sweep CSVs: bound maps, ratio maps, and wideband
ambiguity surfaces with marginal cuts."""

from .render import KINDS, PlotSpec, RenderResult, render
from .schema import (GridData, SchemaError, load_bound_map, load_ratio_map,
                     load_wbaf)

__version__ = "0.1.0"
