"""Backend selection for the closure kernel.

The compiled Cython kernel is used when available; otherwise the pure-Python
twin takes over.  ``TENDONGRIP_BACKEND=python|cython`` forces a choice
(forcing ``cython`` raises if the extension was not built).
"""

import importlib
import os

_requested = os.environ.get("TENDONGRIP_BACKEND", "auto").strip().lower()

if _requested in ("", "auto"):
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _impl
elif _requested == "cython":
    from . import _kernel as _impl  # type: ignore[attr-defined]
elif _requested == "python":
    from . import _kernel_py as _impl
else:
    raise RuntimeError(f"unknown TENDONGRIP_BACKEND {_requested!r}")

BACKEND = _impl.BACKEND_NAME

MODE_RIGID = 0
MODE_SPRING = 1
MODE_MOVABLE = 2
SHAPE_CIRCLE = 0
SHAPE_POLYGON = 1
TERM_STALL = 0
TERM_EJECT_RADIUS = 1
TERM_EJECT_LOSS = 2
TERM_MAX_STEPS = 3

fk_finger = _impl.fk_finger
closest_on_segment = _impl.closest_on_segment
seg_seg_closest = _impl.seg_seg_closest
capsule_shape_contact = _impl.capsule_shape_contact
finger_contact_forces = _impl.finger_contact_forces
run_closure = _impl.run_closure


def load_backend(name: str):
    """Import a specific kernel module ('python' or 'cython') for comparison."""
    if name == "python":
        return importlib.import_module("tendongrip._kernel_py")
    if name == "cython":
        return importlib.import_module("tendongrip._kernel")
    raise ValueError(f"unknown backend {name!r}")
