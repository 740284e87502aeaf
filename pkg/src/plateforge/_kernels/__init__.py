"""Kernel backend selection.

The compiled extension is preferred; the pure-numpy fallback keeps the
package functional (slower) when the extension is unavailable. Set
PLATEFORGE_KERNELS=python or =compiled to force a backend.
"""

import os

from . import _pure

_forced = os.environ.get("PLATEFORGE_KERNELS", "").strip().lower()

if _forced == "python":
    active = _pure
elif _forced == "compiled":
    from . import _compiled as active
else:
    try:
        from . import _compiled as active
    except ImportError:
        active = _pure

BACKEND = active.BACKEND_NAME


def get_backend(name=None):
    """Return a kernel module by name ('compiled' or 'python'); default active."""
    if name is None:
        return active
    if name == "python":
        return _pure
    if name == "compiled":
        from . import _compiled

        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")
