"""Offline figure rendering for the baseband-processing simulator's CSVs.

These scripts never recompute simulation values: the CSV files are the
single source of truth, and rendering only restyles their contents.
"""

__version__ = "0.1.0"

from .render import PlotSpec, SchemaError, render
