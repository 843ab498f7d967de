"""Figure rendering for degradation-loss analysis outputs."""

__version__ = "0.1.0"

from .render import SchemaError, plot_landscape, plot_loss, plot_maps

__all__ = ["SchemaError", "plot_landscape", "plot_loss", "plot_maps", "__version__"]
