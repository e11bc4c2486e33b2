"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting the environment
variable ``LOEWNER_LAB_PURE=1`` forces the numpy fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("LOEWNER_LAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

RADIAL = _kernels_py.RADIAL
CHORDAL = _kernels_py.CHORDAL

flow_batch = _impl.flow_batch
gronwall_pair = _impl.gronwall_pair
walk_chunk = _impl.walk_chunk
loop_erase_indices = _impl.loop_erase_indices
count_crossings = _impl.count_crossings
tip_candidates = getattr(_impl, "tip_candidates", _kernels_py.tip_candidates)
