"""Propagation kernel backends.

The compiled Cython kernel is used when the extension is built; otherwise
the pure-NumPy twin takes over.  Set MLPF_PRICING_BACKEND=numpy (or
=cython) to force a backend.  Both produce bit-identical output, so the
choice only affects speed.
"""

import os

from . import _euler_np

PRICE_FLOOR = _euler_np.PRICE_FLOOR


def _load_cython():
    from . import _euler_cy

    return _euler_cy


_requested = os.environ.get("MLPF_PRICING_BACKEND", "").lower()
if _requested == "numpy":
    _impl = _euler_np
    BACKEND = "numpy"
elif _requested == "cython":
    _impl = _load_cython()
    BACKEND = "cython"
elif _requested:
    raise ValueError(f"MLPF_PRICING_BACKEND must be 'numpy' or 'cython', got {_requested!r}")
else:
    try:
        _impl = _load_cython()
        BACKEND = "cython"
    except ImportError:
        _impl = _euler_np
        BACKEND = "numpy"

propagate = _impl.propagate
propagate_coupled = _impl.propagate_coupled


def available_backends():
    """Names of importable backends, fallback first."""
    names = ["numpy"]
    try:
        _load_cython()
    except ImportError:
        pass
    else:
        names.append("cython")
    return names


def get_backend(name):
    """Backend module by name, for parity tests and benchmarks."""
    if name == "numpy":
        return _euler_np
    if name == "cython":
        return _load_cython()
    raise ValueError(f"unknown backend {name!r}")
