"""Dual-lattice admissibility measurements.

The dual lattice ``b_n(Z^d)`` carries the cubature error: its nonzero
points should satisfy the norm-product bound ``prod_j |z_j| >= n / det(t_tilde)``
and its dyadic shell counts should vanish below the hyperbolic-cross
threshold.  This module measures both on finite search regions.  Reports
always carry the search bounds; nothing is claimed about points outside
them (the tool measures, it does not prove).

Shell membership is decided on canonical binary64 coordinates with the
same bit-exact policy as cube enumeration (non-strict lower bound, strict
upper bound, absolute values).  Norm products, by contrast, are certified
in 80-bit extended precision: a dual point with one tiny coordinate is hit
by cancellation amplified through large integer preimages, and binary64
products can dip below the true bound by more than the 1e-8 acceptance
margin while extended precision keeps the deficit near 1e-10.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .enumeration import DEFAULT_BUDGET, lattice_points_in_box
from .errors import InvalidSpecError, RadiusTooSmallError
from .generator import FrolovLattice, longdouble_matrices


@dataclass(frozen=True)
class DyadicBox:
    """The dyadic shell ``{x : c1 * floor(2**(m_j - 1)) <= |x_j| < c2 * 2**m_j}``.

    With ``c1 = c2 = 1`` the shells partition each axis range (``m_j = 0``
    covers ``|x_j| < 1`` since ``floor(2**-1) = 0``), which makes the
    aggregate counts directly comparable against one sweep of the union.
    """

    m: tuple[int, ...]
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self) -> None:
        if any(mj < 0 or not isinstance(mj, int) for mj in self.m):
            raise InvalidSpecError(f"shell index must be nonnegative integers, got {self.m}")
        if not (0.0 < self.c1 <= self.c2):
            raise InvalidSpecError(f"need 0 < c1 <= c2, got c1={self.c1}, c2={self.c2}")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.c1 * float(math.floor(2.0 ** (mj - 1))) for mj in self.m])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.c2 * 2.0**mj for mj in self.m])


@dataclass(frozen=True)
class DualSpectrumReport:
    """Aggregated dual-lattice measurements for one lattice.

    ``fitted_c`` is the empirical stand-in for the hyperbolic-cross
    constant: the smallest ``c`` with ``Z_n(m) = 0`` whenever
    ``|m|_1 <= log2(n) - c`` over the searched range, i.e.
    ``log2(n) - (min occupied |m|_1) + 1``.  It is a measurement, never
    asserted against a theoretical value.
    """

    n: float
    dimension: int
    search_radius: float
    m_max: int
    c1: float
    c2: float
    min_norm_product: float
    argmin_point: tuple[float, ...]
    z_counts: tuple[tuple[tuple[int, ...], int], ...]
    fitted_c: float | None
    max_density_ratio: float | None
    admissibility_guaranteed: bool

    def count(self, m: tuple[int, ...]) -> int:
        for key, value in self.z_counts:
            if key == m:
                return value
        raise KeyError(m)


# ---------------------------------------------------------------------------


def _dual_preimages_in_axis_box(
    lattice: FrolovLattice, extents: np.ndarray, budget: int
) -> np.ndarray:
    """Nonzero ``k`` with ``|(b_n k)_j| <= extents[j]`` for all ``j``."""
    context = f"n={lattice.n:g}, d={lattice.dimension} (dual)"
    k = lattice_points_in_box(
        lattice.b_n, -extents, extents, open_upper=False, budget=budget, context=context
    )
    return k[np.any(k != 0, axis=1)]


def certified_norm_products(lattice: FrolovLattice, preimages: np.ndarray) -> np.ndarray:
    """``prod_j |(b_n k)_j|`` per row, in extended precision."""
    _, b_ld, _ = longdouble_matrices(lattice)
    z = preimages.astype(np.longdouble) @ b_ld.T
    return np.prod(np.abs(z), axis=1)


def norm_product_bound(lattice: FrolovLattice) -> float:
    """The proof-level lower bound ``n / det(t_tilde)`` for admissible generators."""
    _, _, det_ld = longdouble_matrices(lattice)
    return float(np.longdouble(lattice.n) / det_ld)


def min_norm_product(
    lattice: FrolovLattice, radius: float, budget: int = DEFAULT_BUDGET
) -> tuple[float, tuple[float, ...]]:
    """Minimum of ``prod_j |z_j|`` over nonzero dual points with ``|z|_inf <= radius``.

    A restricted-search minimum: an upper bound on the lattice-wide infimum.
    """
    if not (radius > 0.0):
        raise InvalidSpecError(f"radius must be positive, got {radius!r}")
    d = lattice.dimension
    preimages = _dual_preimages_in_axis_box(lattice, np.full(d, float(radius)), budget)
    if not len(preimages):
        raise RadiusTooSmallError(
            f"no nonzero dual point with |z|_inf <= {radius:g} (n={lattice.n:g}, d={d})"
        )
    products = certified_norm_products(lattice, preimages)
    i = int(np.argmin(products))
    argmin = preimages[i].astype(np.float64) @ lattice.b_n.T
    return float(products[i]), tuple(float(v) for v in argmin)


def _shell_points(lattice: FrolovLattice, box: DyadicBox, budget: int) -> np.ndarray:
    """Preimages of nonzero dual points inside the shell (canonical filter)."""
    preimages = _dual_preimages_in_axis_box(lattice, box.upper, budget)
    if not len(preimages):
        return preimages
    z = np.abs(preimages @ lattice.b_n.T)
    keep = np.all((z >= box.lower[None, :]) & (z < box.upper[None, :]), axis=1)
    return preimages[keep]


def count_dyadic(lattice: FrolovLattice, box: DyadicBox, budget: int = DEFAULT_BUDGET) -> int:
    """Exact ``Z_n(m)``: nonzero dual points inside one dyadic shell."""
    if len(box.m) != lattice.dimension:
        raise InvalidSpecError(f"shell index has arity {len(box.m)}, lattice is {lattice.dimension}-d")
    return len(_shell_points(lattice, box, budget))


def _all_shell_indices(d: int, m_max: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], left: int) -> None:
        if len(prefix) == d - 1:
            for v in range(left + 1):
                out.append(prefix + (v,))
            return
        for v in range(left + 1):
            rec(prefix + (v,), left - v)

    if d == 1:
        return [(v,) for v in range(m_max + 1)]
    rec((), m_max)
    return sorted(out)


def spectrum_report(
    lattice: FrolovLattice,
    m_max: int,
    radius: float,
    c1: float = 1.0,
    c2: float = 1.0,
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> DualSpectrumReport:
    """Shell counts for all ``|m|_1 <= m_max`` plus the box-restricted minimum.

    The reported ``min_norm_product`` is taken over every point enumerated,
    in the radius box and in every shell.  Shell counts are exact per shell
    and independent of ``radius``.
    """
    if m_max < 0:
        raise InvalidSpecError(f"m_max must be >= 0, got {m_max}")
    d = lattice.dimension
    indices = _all_shell_indices(d, m_max)

    def one_shell(m: tuple[int, ...]):
        pts = _shell_points(lattice, DyadicBox(m, c1, c2), budget)
        if not len(pts):
            return m, 0, None, None
        products = certified_norm_products(lattice, pts)
        i = int(np.argmin(products))
        return m, len(pts), float(products[i]), pts[i]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shell_rows = list(pool.map(one_shell, indices))
    else:
        shell_rows = [one_shell(m) for m in indices]

    counts = tuple((m, cnt) for m, cnt, _, _ in shell_rows)
    occupied = [(m, cnt, mn, arg) for m, cnt, mn, arg in shell_rows if cnt]
    overall_min, argmin = min_norm_product(lattice, radius, budget=budget)
    for _, _, shell_min, arg in occupied:
        if shell_min is not None and shell_min < overall_min:
            overall_min = shell_min
            argmin = tuple(float(v) for v in arg.astype(np.float64) @ lattice.b_n.T)
    if occupied:
        l_min = min(sum(m) for m, _, _, _ in occupied)
        fitted_c = math.log2(lattice.n) - l_min + 1
        density = max(cnt * lattice.n / 2.0 ** sum(m) for m, cnt, _, _ in occupied)
    else:
        fitted_c, density = None, None
    return DualSpectrumReport(
        n=lattice.n,
        dimension=d,
        search_radius=float(radius),
        m_max=m_max,
        c1=c1,
        c2=c2,
        min_norm_product=overall_min,
        argmin_point=argmin,
        z_counts=counts,
        fitted_c=fitted_c,
        max_density_ratio=density,
        admissibility_guaranteed=lattice.polynomial.coefficients is not None,
    )
