"""Kernel backend selected at import time.

The compiled Cython extension is used when it was built; otherwise, or when
``DDMOD_PURE_PYTHON`` is set in the environment, the NumPy implementation in
``_pykernels`` is used. Both expose ``path_stats`` and ``grid_sums`` with the
same signatures and produce identical numbers.
"""

import importlib
import os

from . import _pykernels

MARKOWITZ = _pykernels.MARKOWITZ
MODULATED = _pykernels.MODULATED
STATUS_BANKRUPT = _pykernels.STATUS_BANKRUPT
STATUS_BREACH = _pykernels.STATUS_BREACH


def load(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "compiled":
        return importlib.import_module(f"{__package__}._kernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def available():
    names = ["python"]
    try:
        load("compiled")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


if os.environ.get("DDMOD_PURE_PYTHON"):
    BACKEND = "python"
else:
    BACKEND = available()[0]

_impl = load(BACKEND)
path_stats = _impl.path_stats
grid_sums = _impl.grid_sums
