"""Kernel backend selection.

numba is used when importable unless ``CYBERADEQUACY_DISABLE_NUMBA`` is set
to a non-empty value other than ``0``.
"""
import logging
import os

from . import _kernel_numpy

log = logging.getLogger(__name__)

ENV_FLAG = "CYBERADEQUACY_DISABLE_NUMBA"


def _numba_disabled():
    return os.environ.get(ENV_FLAG, "").strip() not in ("", "0")


def load_kernel(name=None):
    """Return ``(backend_name, replicate_block)``.

    :param name: ``"numba"``, ``"numpy"`` or ``None`` for the default choice
    """
    if name is None:
        name = "numpy" if _numba_disabled() else "numba"
    if name == "numpy":
        return "numpy", _kernel_numpy.replicate_block
    if name != "numba":
        raise ValueError(f"unknown backend {name!r}")
    try:
        from . import _kernel_numba
    except ImportError:
        log.warning("numba unavailable; falling back to the numpy kernel")
        return "numpy", _kernel_numpy.replicate_block
    return "numba", _kernel_numba.replicate_block


BACKEND, replicate_block = load_kernel()
