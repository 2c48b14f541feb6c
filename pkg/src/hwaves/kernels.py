"""Backend selection for the hot loops.

The compiled extension ``hwaves._ckernels`` is used when it was built and
imports cleanly; otherwise the NumPy implementations are used.  Setting the
environment variable ``HWAVES_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("HWAVES_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels


def bim_kernel(h, hx, hxx):
    """Complex ``M x M`` boundary-integral kernel (see :mod:`hwaves.euler`)."""
    return _impl.bim_kernel(
        np.ascontiguousarray(h, dtype=float),
        np.ascontiguousarray(hx, dtype=float),
        np.ascontiguousarray(hxx, dtype=float),
    )


def bim_kernel_parts(h, hx, hxx, out=None, scale=1.0, im_shift=0.0):
    """``scale * (Re K, Im K)`` as two real ``M x M`` arrays, optionally written into ``out``.

    ``im_shift`` is added to the diagonal of the imaginary part.
    """
    return _impl.bim_kernel_parts(
        np.ascontiguousarray(h, dtype=float),
        np.ascontiguousarray(hx, dtype=float),
        np.ascontiguousarray(hxx, dtype=float),
        out,
        float(scale),
        float(im_shift),
    )


def conv_direct(a, b, half):
    """Batched two-sided direct convolution truncated to ``-half..half``."""
    return _impl.conv_direct(
        np.ascontiguousarray(a, dtype=complex), np.ascontiguousarray(b, dtype=complex), int(half)
    )
