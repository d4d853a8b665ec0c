"""Hot numeric kernels with a compiled core and a pure-numpy fallback.

The Cython extension `_core` is built at install time when a C toolchain
is available; importing this package picks the fastest backend present.
Set the environment variable GBMEM_KERNELS=py before import to force the
numpy fallback (used by the backend benchmark and for debugging).

Both backends implement the same three functions with identical
contracts, documented in pyfallback.py:

  scatter_xor(buf, shot_idx, rows, mech_idx)
  bp_min_sum(row_ptr, col_idx, col_ptr, edge_rm, llr, syndrome,
             max_iters, ms_scale, posterior, hard) -> (converged, iters)
  gf2_rref_packed(mat, col_order) -> (rank, pivot_cols)
"""

import os

from . import pyfallback

if os.environ.get("GBMEM_KERNELS") == "py":
    _impl = pyfallback
    backend_name = "python"
else:
    try:
        from . import _core as _impl
        backend_name = "compiled"
    except ImportError:
        _impl = pyfallback
        backend_name = "python"

MESSAGE_CLAMP = pyfallback.MESSAGE_CLAMP
scatter_xor = _impl.scatter_xor
bp_min_sum = _impl.bp_min_sum
gf2_rref_packed = _impl.gf2_rref_packed

__all__ = [
    "backend_name",
    "scatter_xor",
    "bp_min_sum",
    "gf2_rref_packed",
    "MESSAGE_CLAMP",
]
