"""Backend selection for the membership kernels.

The compiled ``_ckernels`` extension is preferred. Set
``CONCEPT_FORGE_BACKEND=python`` to force the numpy fallback.
"""
import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

_requested = os.environ.get("CONCEPT_FORGE_BACKEND", "auto").lower()

if _requested == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _requested == "compiled":
            raise
        log.debug("compiled kernels unavailable, using numpy fallback")
        _impl = _pykernels
        BACKEND = "python"
    else:
        BACKEND = "compiled"

softplus_axes = _impl.softplus_axes
inverse_transform = _impl.inverse_transform
grid_counts = _impl.grid_counts
genome_counts = _impl.genome_counts
candidate_tensor = _impl.candidate_tensor

AXIS_FLOOR = _pykernels.AXIS_FLOOR


def get_backend(name):
    """Return the kernel module for ``name`` (``"compiled"`` or ``"python"``)."""
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
