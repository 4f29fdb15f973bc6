"""Symbolic-numeric engine for tension fields, HS/HM-tensional maps and submanifolds."""

__version__ = "0.1.0"

from . import errors, expr, jet, riemann, maps, submanifold, casebook  # noqa: E402,F401

__all__ = ["errors", "expr", "jet", "riemann", "maps", "submanifold", "casebook", "config",
           "cli", "__version__"]
