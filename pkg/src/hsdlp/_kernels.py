"""Select the sparse LDL^T kernel implementation at import time.

The compiled module ``_ldl_cy`` handles float64 data; the pure-Python module
handles everything else and is used for float64 as well when the extension
is missing or ``HSDLP_PURE_PYTHON=1`` is set.
"""

import os

from . import _ldl_py as python_kernels

try:
    if os.environ.get("HSDLP_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels forced by HSDLP_PURE_PYTHON")
    from . import _ldl_cy as compiled_kernels
except ImportError:
    compiled_kernels = None

HAVE_COMPILED = compiled_kernels is not None


def kernels_for(dtype, prefer_compiled: bool = True):
    if prefer_compiled and compiled_kernels is not None and dtype == float:
        return compiled_kernels
    return python_kernels


def describe() -> str:
    return "compiled" if HAVE_COMPILED else "pure-python"
