"""Figure scripts for gqmc experiment CSVs.

Reads the experiment schema (experiment, generator, i, n, kernel, value,
value_kind, seed, extra) and renders the two log-log charts: worst-case
integration error vs n and covering radius vs n, with reference slope guides.
This package talks to the experiment pipeline only through its CSV files.
"""

from .records import Row, SchemaError, read_rows
from .render import (
    EmptySeriesWarning,
    PlotSpec,
    expected_covering_curve,
    guide_alignment,
    render,
)

__version__ = "0.1.0"
