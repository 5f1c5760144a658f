from . import errors, io, modules, ops, utils, pipeline, diagnostics, scenarios

__version__ = "0.1.0"

__all__ = ["errors", "io", "modules", "ops", "utils", "pipeline", "diagnostics", "scenarios"]
