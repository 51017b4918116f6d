__version__ = "0.1.0"

from . import common, model, solve, analysis, data

__all__ = ["common", "model", "solve", "analysis", "data"]
