"""Kernel backend selection.

The compiled Cython core is preferred; the pure-Python mirror is used when
the extension is missing or HEXWIND_FORCE_PURE=1 is set.  Both expose the
same functions with identical semantics and RNG consumption order.
"""

import os

from . import _pure as pure

if os.environ.get("HEXWIND_FORCE_PURE", "") == "1":
    impl = pure
else:
    try:
        from . import _core as impl  # type: ignore[attr-defined]
    except ImportError:
        impl = pure

BACKEND = impl.BACKEND

explore = impl.explore
extract_loops = impl.extract_loops
annulus_strands = impl.annulus_strands
sde_path = impl.sde_path
sde_path_record = impl.sde_path_record

REACHED_B = pure.REACHED_B
HIT_H0 = pure.HIT_H0
HIT_RADIUS = pure.HIT_RADIUS
STEP_LIMIT = pure.STEP_LIMIT
