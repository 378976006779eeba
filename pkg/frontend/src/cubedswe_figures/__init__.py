"""Figure generation from cubedswe CSV output files."""

from .render import (FIGURE_KINDS, plot_difference_map,
                     plot_loglog_convergence, plot_sphere_map,
                     plot_timeseries, renderer_key)
from .schemas import SchemaError, read_table

__all__ = [
    "FIGURE_KINDS",
    "SchemaError",
    "plot_difference_map",
    "plot_loglog_convergence",
    "plot_sphere_map",
    "plot_timeseries",
    "read_table",
    "renderer_key",
]
