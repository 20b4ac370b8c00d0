"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
fallback.  ``use_backend`` switches explicitly (tests and benchmarks).
"""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

_active = _compiled if _compiled is not None else _kernels_py


def backend():
    return _active


def backend_name():
    return _active.NAME


def use_backend(name):
    """Select 'cython' or 'python'; returns the previous backend name."""
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {sorted(BACKENDS)})")
    prev = _active.NAME
    _active = BACKENDS[name]
    return prev


def van_leer(*args):
    return _active.van_leer(*args)


def micro_flux(*args):
    return _active.micro_flux(*args)
