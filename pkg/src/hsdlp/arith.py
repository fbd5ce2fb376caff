"""Scalar arithmetic used throughout the solver.

Every numeric routine takes its arrays from an :class:`Arithmetic` so the same
code runs in IEEE double precision or in a software multi-precision scalar
(``gmpy2.mpfr``).  Extended-precision arrays are numpy ``object`` arrays.
"""

from __future__ import annotations

import math

import numpy as np


class Arithmetic:
    name = "abstract"
    dtype: object = None
    eps: float = 0.0
    # smallest value the IPM lets a positive variable shrink to (0 = no floor)
    tiny: float = 0.0

    def scalar(self, v):
        raise NotImplementedError

    def asarray(self, values) -> np.ndarray:
        raise NotImplementedError

    def zeros(self, shape) -> np.ndarray:
        return self.asarray(np.zeros(shape))

    def ones(self, shape) -> np.ndarray:
        return self.asarray(np.ones(shape))

    def sqrt(self, x):
        raise NotImplementedError

    def to_float(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)

    @property
    def sqrt_eps(self):
        return self.sqrt(self.scalar(self.eps))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class Float64(Arithmetic):
    name = "Float64"
    dtype = np.float64
    eps = float(np.finfo(np.float64).eps)
    tiny = float(np.finfo(np.float64).tiny)

    def scalar(self, v):
        return np.float64(v)

    def asarray(self, values):
        return np.asarray(values, dtype=np.float64)

    def sqrt(self, x):
        return np.sqrt(x)


class Extended(Arithmetic):
    """Software floating point with ``precision`` mantissa bits (gmpy2.mpfr).

    Creating an instance raises the precision of the active gmpy2 context to
    at least ``precision`` bits; mpfr arithmetic is rounded to that context.
    """

    dtype = object

    def __init__(self, precision: int = 113):
        import gmpy2

        self._gmpy2 = gmpy2
        self.precision = precision
        ctx = gmpy2.get_context()
        if ctx.precision < precision:
            ctx.precision = precision
        self.name = f"mpfr{precision}"
        self.eps = float(2.0 ** (1 - precision))
        self._to_mpfr = np.frompyfunc(gmpy2.mpfr, 1, 1)
        self._sqrt = np.frompyfunc(gmpy2.sqrt, 1, 1)

    def scalar(self, v):
        return self._gmpy2.mpfr(v)

    def asarray(self, values):
        arr = np.asarray(values)
        if arr.dtype == object and arr.size and all(
            isinstance(v, type(self._gmpy2.mpfr(0))) for v in arr.flat
        ):
            return arr
        if arr.ndim == 0:
            return np.array(self._to_mpfr(arr), dtype=object)
        out = self._to_mpfr(arr)
        return np.asarray(out, dtype=object)

    def sqrt(self, x):
        if isinstance(x, np.ndarray):
            return np.asarray(self._sqrt(x), dtype=object)
        return self._gmpy2.sqrt(x)

    def to_float(self, x):
        return np.asarray(np.frompyfunc(float, 1, 1)(np.asarray(x, dtype=object)), dtype=float)


FLOAT64 = Float64()


def get_arithmetic(name: str | Arithmetic | None) -> Arithmetic:
    """Resolve ``"double"``/``"extended"`` (or an instance) to an Arithmetic."""
    if name is None:
        return FLOAT64
    if isinstance(name, Arithmetic):
        return name
    key = str(name).lower()
    if key in ("double", "float64", "f64"):
        return FLOAT64
    if key in ("extended", "quad", "mpfr", "mpfr113"):
        return Extended(113)
    raise ValueError(f"unknown arithmetic {name!r}")


def norm_inf(v) -> object:
    if len(v) == 0:
        return 0.0
    return np.max(np.abs(v))


def isfinite(v) -> bool:
    return math.isfinite(float(v))
