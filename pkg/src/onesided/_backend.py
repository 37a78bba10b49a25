"""Selects the kernel backend at import time.

Prefers the compiled Cython module, falls back to the numpy one. Set
ONESIDED_BACKEND=python to force the fallback (used by the benchmark and
the backend-parity tests).
"""

import os

from . import _kernels_py

if os.environ.get("ONESIDED_BACKEND", "").lower() == "python":
    kernels = _kernels_py
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND_NAME = kernels.NAME

uniforms_from_raw = kernels.uniforms_from_raw
inverse_cdf_lookup = kernels.inverse_cdf_lookup
hockey_stick_pair = kernels.hockey_stick_pair
