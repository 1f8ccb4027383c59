"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` is used when it was built; otherwise,
or when the environment variable ``HYPERPROTO_PURE`` is set to a non-empty
value other than ``0``, the numpy fallback is used. ``BACKEND`` names the
active choice.
"""

import os

from . import _kernels_py


def _want_pure():
    return os.environ.get("HYPERPROTO_PURE", "") not in ("", "0")


if _want_pure():
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

rank_accumulate = _impl.rank_accumulate
rowmax_scatter = _impl.rowmax_scatter
