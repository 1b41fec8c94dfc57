"""Selection of the propagation kernel.

The compiled extension ``geogate._kernel`` is used when it imports; otherwise
the NumPy version in ``geogate._kernel_py`` takes over. Set the environment
variable ``GEOGATE_BACKEND`` to ``python`` or ``compiled`` to force a choice at
import time, or call :func:`set_backend` at run time.
"""

from __future__ import annotations

import importlib
import os
import warnings

ENV_VAR = "GEOGATE_BACKEND"
_MODULES = {"compiled": "geogate._kernel", "python": "geogate._kernel_py"}
_active = {"name": None, "module": None}


def available() -> list[str]:
    names = []
    for name, mod in _MODULES.items():
        try:
            importlib.import_module(mod)
        except ImportError:
            continue
        names.append(name)
    return names


def set_backend(name: str = "auto") -> str:
    """Activate a backend and return its name."""
    if name == "auto":
        try:
            module = importlib.import_module(_MODULES["compiled"])
            name = "compiled"
        except ImportError:
            warnings.warn("compiled kernel unavailable; using the NumPy fallback", RuntimeWarning, stacklevel=2)
            module = importlib.import_module(_MODULES["python"])
            name = "python"
    elif name in _MODULES:
        module = importlib.import_module(_MODULES[name])
    else:
        raise ValueError(f"unknown backend {name!r}; choose from auto, {', '.join(_MODULES)}")
    _active["name"], _active["module"] = name, module
    return name


def active() -> str:
    return _active["name"]


def propagate(*args, **kwargs):
    """Forward to the active kernel's ``propagate``."""
    return _active["module"].propagate(*args, **kwargs)


def get(name: str):
    """Kernel module by name, without changing the active one."""
    return importlib.import_module(_MODULES[name])


set_backend(os.environ.get(ENV_VAR, "auto"))
