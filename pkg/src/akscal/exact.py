"""Exact rational linear algebra on small object-dtype matrices.

Curvature tables of the shipped homogeneous structures are rational, so the
whole frame calculus can run on ``fractions.Fraction`` entries.  numpy object
arrays dispatch ``+``, ``*`` and ``@`` to the Fraction operators, which keeps
the code identical to the floating path; the only thing numpy cannot do on
object arrays is invert them, hence the Gauss-Jordan routine below.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np


def frac(x) -> Fraction:
    """Coerce ints, Fractions and decimal/ratio strings to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    raise TypeError(f"not exactly representable: {x!r}")


def as_exact(a) -> np.ndarray:
    """Object array of Fractions from any nested int/Fraction/str data."""
    arr = np.asarray(a, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = frac(arr[idx])
    return out


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_float(a) -> np.ndarray:
    return np.asarray(a, dtype=float)


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out[...] = Fraction(0)
    return out


def eye(n: int) -> np.ndarray:
    out = zeros((n, n))
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def mat_inv(a: np.ndarray) -> np.ndarray:
    """Exact inverse by Gauss-Jordan elimination; raises on singular input."""
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    m = as_exact(a)
    inv = eye(n)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r, col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        if pivot != col:
            m[[col, pivot]] = m[[pivot, col]]
            inv[[col, pivot]] = inv[[pivot, col]]
        p = m[col, col]
        m[col] = m[col] / p
        inv[col] = inv[col] / p
        for r in range(n):
            if r != col and m[r, col] != 0:
                f = m[r, col]
                m[r] = m[r] - f * m[col]
                inv[r] = inv[r] - f * inv[col]
    return inv


def maybe_exact(a, prefer_exact: bool | None = None):
    """Return (array, exact_flag): Fractions when the data allows it.

    ``prefer_exact=False`` forces floats, ``True`` demands exactness (raising
    if the data is not rational), ``None`` auto-detects.
    """
    if prefer_exact is False:
        return to_float(a), False
    try:
        return as_exact(a), True
    except (TypeError, ValueError):
        if prefer_exact:
            raise
        return to_float(a), False
