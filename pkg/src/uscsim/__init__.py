"""Amplified-coupling and ultrastrong-coupling simulation toolkit.

Submodules are imported lazily so that the command-line entry point can pin
BLAS thread counts (USC_NUM_THREADS) before numpy is first loaded.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "errors",
    "hilbert",
    "models",
    "squeeze_amp",
    "effective",
    "schemes",
    "dynamics",
    "cli",
)

__all__ = list(_SUBMODULES)


def __getattr__(name):
    if name in _SUBMODULES:
        module = importlib.import_module("." + name, __name__)
        globals()[name] = module
        return module
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
