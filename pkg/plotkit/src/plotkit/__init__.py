"""plotkit: figures from gateforge's CSV artifacts."""

from .render import KINDS, PlotSpec, SchemaError, render, staircase_edges

__version__ = "0.1.0"
