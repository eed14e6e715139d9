"""k-times bin packing solvers and fair electricity distribution toolkit."""

__version__ = "0.1.0"

from .core import Instance, Packing, Size, WelfareReport, validate_packing, welfare

__all__ = [
    "Instance",
    "Packing",
    "Size",
    "WelfareReport",
    "validate_packing",
    "welfare",
    "__version__",
]
