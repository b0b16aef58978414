"""Kernel backend selection.

The compiled extension is used when importable; ``KERRTDA_PURE=1`` forces the
pure-Python kernels (useful for debugging and for the cross-backend tests).
"""

import importlib
import os

BACKENDS = ("compiled", "python")


def load(name):
    if name == "compiled":
        return importlib.import_module("kerrtda._core")
    if name == "python":
        return importlib.import_module("kerrtda._pure")
    raise ValueError(f"unknown backend {name!r}")


def _select():
    if os.environ.get("KERRTDA_PURE") == "1":
        return "python", load("python")
    try:
        return "compiled", load("compiled")
    except ImportError:
        return "python", load("python")


BACKEND, kernels = _select()
