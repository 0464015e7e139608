"""Numerical convex geometry of sine polarity.

Submodules are imported lazily so the command line entry point can apply
the SINEBODY_THREADS cap before numpy loads.
"""

from importlib import import_module

__version__ = "0.1.0"

_SUBMODULES = ("geometry", "quadrature", "bodies", "sphere_opt",
               "centroid", "polarity", "harness", "cli")

__all__ = list(_SUBMODULES)


def __getattr__(name):
    if name in _SUBMODULES:
        return import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
