"""Backend selection for the geodesic RK4 kernel.

The compiled extension ``_kernels`` is used when importable; set
``HOLOTORSION_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _kernels_py


def _load_compiled():
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


_compiled = None if os.environ.get("HOLOTORSION_PURE_PYTHON") else _load_compiled()
_active = _compiled or _kernels_py

BACKEND = _active.BACKEND


def get_backend(name: str | None = None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "cython":
        mod = _compiled or _load_compiled()
        if mod is None:
            raise ImportError("compiled kernel not built; run `pip install -e . --no-build-isolation`")
        return mod
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    return (_compiled or _load_compiled()) is not None


def rk4_batch(code, consts, outputs, init, h, nsteps, last, backend: str | None = None):
    return get_backend(backend).rk4_batch(code, consts, outputs, init, h, nsteps, last)


def eval_programs(code, consts, outputs, u, v, backend: str | None = None):
    return get_backend(backend).eval_programs(code, consts, outputs, u, v)
