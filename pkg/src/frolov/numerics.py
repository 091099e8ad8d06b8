"""Compensated floating-point primitives.

Lattice matrix entries grow like ``(2d)**(d-1)`` and admissibility margins
can sit many digits below the raw operand scale, so the sums and products
that feed certified bounds use error-free transformations (or extended
precision) instead of naive accumulation.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1, Dekker's splitter for binary64


def two_sum(a: float, b: float) -> tuple[float, float]:
    """Error-free sum: ``s == fl(a+b)`` and ``s + e == a + b`` exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def two_prod(a: float, b: float) -> tuple[float, float]:
    """Error-free product: ``p == fl(a*b)`` and ``p + e == a * b`` exactly."""
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


class NeumaierSum:
    """Running compensated sum (Neumaier's variant of Kahan summation)."""

    __slots__ = ("_s", "_c")

    def __init__(self) -> None:
        self._s = 0.0
        self._c = 0.0

    def add(self, x: float) -> None:
        t = self._s + x
        if abs(self._s) >= abs(x):
            self._c += (self._s - t) + x
        else:
            self._c += (x - t) + self._s
        self._s = t

    @property
    def value(self) -> float:
        return self._s + self._c


def compensated_product(xs: Iterable[float]) -> float:
    """Product of a short sequence, accumulated with two-product error
    tracking so the result behaves as if computed in doubled precision."""
    p, e = 1.0, 0.0
    for x in xs:
        p, pe = two_prod(p, x)
        e = e * x + pe
    return p + e


def row_products_compensated(x: np.ndarray) -> np.ndarray:
    """``compensated_product`` across the rows of a 2-D float64 array."""
    x = np.asarray(x, dtype=np.float64)
    p = np.ones(len(x))
    e = np.zeros(len(x))
    for j in range(x.shape[1]):
        c = x[:, j]
        t = _SPLIT * p
        ph = t - (t - p)
        pl = p - ph
        t = _SPLIT * c
        ch = t - (t - c)
        cl = c - ch
        q = p * c
        pe = ((ph * ch - q) + ph * cl + pl * ch) + pl * cl
        e = e * c + pe
        p = q
    return p + e


def vandermonde_det(xs: Sequence[float]) -> float:
    """``prod_{i<j} (xs[j] - xs[i])`` with compensated accumulation."""
    n = len(xs)
    diffs = [xs[j] - xs[i] for i in range(n) for j in range(i + 1, n)]
    if not diffs:
        return 1.0
    return compensated_product(diffs)
