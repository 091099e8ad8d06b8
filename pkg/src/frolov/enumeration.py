"""Enumeration of lattice points inside axis-aligned boxes.

The preimage of a box under the generator matrix is a parallelepiped whose
integer bounding box can be enormously larger than its point count,
especially for the long-thin dyadic shells of the dual analysis.  Candidate
ranges are therefore tightened per coordinate with constraints projected by
Fourier-Motzkin elimination: at depth ``j`` the admissible interval for
``k_j`` given the fixed prefix is the exact projection of the constraint
polytope (up to a conservative slop).  Expansion is breadth-first and
vectorized; a single canonical membership filter decides final acceptance,
so pruning can only ever be conservative.

Membership policy (documented part of the output format): a candidate is
accepted iff its binary64 image ``x = t_n @ k`` satisfies the box bounds
with exact comparisons, half-open ``[0, 1)`` for the unit cube.  No epsilon
snapping.  Points are ordered lexicographically by integer preimage.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceededError
from .generator import FrolovLattice, GeneratorSpec, make_lattice

#: Default cap on candidates visited by one enumeration call.
DEFAULT_BUDGET = 10**9

_SLOP = 1e-7  # relative inflation of tightened bounds; final filter is exact
_DEDUP_DECIMALS = 12


@dataclass(frozen=True, eq=False)
class LatticePointSet:
    """Enumerated points of a lattice inside the half-open unit cube.

    ``points[i] == t_n @ integer_preimages[i]`` entrywise in binary64, rows
    sorted lexicographically by preimage.  Arrays are read-only.
    """

    lattice: FrolovLattice
    points: np.ndarray
    integer_preimages: np.ndarray

    @property
    def count(self) -> int:
        return len(self.points)


# ---------------------------------------------------------------------------
# constraint projection


def _fm_systems(gen: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> list[list]:
    """Per-depth one-sided constraints ``w . k[:j+1] <= c`` with ``w[j] != 0``.

    Built by eliminating variables from the last to the first.  Derived rows
    are normalized and deduplicated; every row is implied by the original
    system, so using them to prune is sound.
    """
    d = gen.shape[0]
    rows: list[tuple[np.ndarray, float]] = []
    for i in range(d):
        rows.append((gen[i].astype(np.float64).copy(), float(upper[i])))
        rows.append((-gen[i].astype(np.float64), -float(lower[i])))
    systems: list[list] = [[] for _ in range(d)]
    current = rows
    for j in range(d - 1, -1, -1):
        systems[j] = [(w[: j + 1].copy(), c) for w, c in current if w[j] != 0.0]
        if j == 0:
            break
        positive = [(w, c) for w, c in current if w[j] > 0.0]
        negative = [(w, c) for w, c in current if w[j] < 0.0]
        derived = [(w, c) for w, c in current if w[j] == 0.0]
        for wp, cp in positive:
            for wn, cn in negative:
                a, b = wp[j], -wn[j]
                w = b * wp + a * wn
                c = b * cp + a * cn
                w[j] = 0.0
                scale = np.max(np.abs(w[:j]))
                if scale == 0.0:
                    continue  # no variables left; final filter covers feasibility
                derived.append((w / scale, c / scale))
        best: dict[tuple, tuple[np.ndarray, float]] = {}
        for w, c in derived:
            key = tuple(np.round(w[:j], _DEDUP_DECIMALS))
            if key not in best or c < best[key][1]:
                best[key] = (w, c)
        current = list(best.values())
    return systems


def _depth_interval(system: Sequence, prefixes: np.ndarray, j: int):
    """Per-prefix integer interval ``[a, b]`` for coordinate ``j``."""
    n = len(prefixes)
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    for w, c in system:
        t = c - prefixes @ w[:j] if j else np.full(n, c)
        if w[j] > 0.0:
            np.minimum(hi, t / w[j], out=hi)
        else:
            np.maximum(lo, t / w[j], out=lo)
    a = np.ceil(lo - _SLOP * (1.0 + np.abs(lo)))
    b = np.floor(hi + _SLOP * (1.0 + np.abs(hi)))
    good = np.isfinite(a) & np.isfinite(b)
    a = np.where(good, a, 0.0).astype(np.int64)
    b = np.where(good, b, -1.0).astype(np.int64)
    return a, b


def _expand(prefixes: np.ndarray, a: np.ndarray, b: np.ndarray, budget: int, context: str):
    counts = np.maximum(0, b - a + 1)
    total = int(counts.sum())
    if total > budget:
        raise BudgetExceededError(
            f"enumeration budget exceeded: {total:.3e} candidates > {budget:.3e} ({context})"
        )
    keep = counts > 0
    prefixes, a, counts = prefixes[keep], a[keep], counts[keep]
    idx = np.repeat(np.arange(len(a)), counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    new_col = a[idx] + offsets
    if prefixes.shape[1]:
        return np.column_stack([prefixes[idx], new_col])
    return new_col[:, None]


def _membership_mask(
    x: np.ndarray, lower: np.ndarray, upper: np.ndarray, open_upper: np.ndarray
) -> np.ndarray:
    mask = np.ones(len(x), dtype=bool)
    for i in range(x.shape[1]):
        mask &= x[:, i] >= lower[i]
        mask &= (x[:, i] < upper[i]) if open_upper[i] else (x[:, i] <= upper[i])
    return mask


def lattice_points_in_box(
    gen: np.ndarray,
    lower: Sequence[float],
    upper: Sequence[float],
    open_upper: bool | Sequence[bool] = False,
    budget: int = DEFAULT_BUDGET,
    context: str = "",
) -> np.ndarray:
    """All ``k`` in ``Z^d`` with ``gen @ k`` inside the box, lexsorted.

    ``open_upper`` selects strict upper comparison per axis (scalar or
    per-axis sequence).  Returns the integer preimages; images follow from
    ``k @ gen.T``.
    """
    gen = np.asarray(gen, dtype=np.float64)
    d = gen.shape[0]
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    open_up = np.broadcast_to(np.asarray(open_upper, dtype=bool), (d,))
    systems = _fm_systems(gen, lower, upper)
    prefixes = np.zeros((1, 0), dtype=np.int64)
    for j in range(d):
        a, b = _depth_interval(systems[j], prefixes, j)
        prefixes = _expand(prefixes, a, b, budget, context)
        if not len(prefixes):
            return np.empty((0, d), dtype=np.int64)
    images = prefixes @ gen.T
    keep = _membership_mask(images, lower, upper, open_up)
    result = prefixes[keep]
    return result[np.lexsort(result.T[::-1])]


def brute_force_points_in_box(
    gen: np.ndarray,
    lower: Sequence[float],
    upper: Sequence[float],
    open_upper: bool | Sequence[bool] = False,
    budget: int = DEFAULT_BUDGET,
    context: str = "",
) -> np.ndarray:
    """Oracle: scan the full integer bounding box of the preimage.

    Shares the canonical membership filter with the tightened enumerator, so
    the two must return identical sets whenever both complete.
    """
    gen = np.asarray(gen, dtype=np.float64)
    d = gen.shape[0]
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    open_up = np.broadcast_to(np.asarray(open_upper, dtype=bool), (d,))
    inv = np.linalg.inv(gen)
    corner_lo = np.minimum(inv * lower[None, :], inv * upper[None, :]).sum(axis=1)
    corner_hi = np.maximum(inv * lower[None, :], inv * upper[None, :]).sum(axis=1)
    k_lo = np.floor(corner_lo - _SLOP * (1.0 + np.abs(corner_lo))).astype(np.int64)
    k_hi = np.ceil(corner_hi + _SLOP * (1.0 + np.abs(corner_hi))).astype(np.int64)
    total = int(np.prod((k_hi - k_lo + 1).astype(np.float64)))
    if total > budget:
        raise BudgetExceededError(
            f"enumeration budget exceeded: {total:.3e} candidates > {budget:.3e} ({context})"
        )
    grids = np.meshgrid(*[np.arange(lo, hi + 1) for lo, hi in zip(k_lo, k_hi)], indexing="ij")
    candidates = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    keep = _membership_mask(candidates @ gen.T, lower, upper, open_up)
    result = candidates[keep]
    return result[np.lexsort(result.T[::-1])]


# ---------------------------------------------------------------------------
# unit-cube enumeration


def enumerate_points(
    lattice: FrolovLattice, budget: int = DEFAULT_BUDGET, threads: int = 1
) -> LatticePointSet:
    """All lattice points in ``[0, 1)^d`` with their integer preimages.

    With ``threads > 1`` the first-coordinate range is partitioned across a
    thread pool; the merged result is sorted, so output is identical to the
    sequential run.
    """
    d = lattice.dimension
    context = f"n={lattice.n:g}, d={d}"
    lower, upper = np.zeros(d), np.ones(d)
    if threads > 1 and d > 1:
        preimages = _enumerate_cube_threaded(lattice, budget, threads, context)
    else:
        preimages = lattice_points_in_box(
            lattice.t_n, lower, upper, open_upper=True, budget=budget, context=context
        )
    points = preimages @ lattice.t_n.T
    preimages.setflags(write=False)
    points.setflags(write=False)
    return LatticePointSet(lattice=lattice, points=points, integer_preimages=preimages)


def _enumerate_cube_threaded(
    lattice: FrolovLattice, budget: int, threads: int, context: str
) -> np.ndarray:
    d = lattice.dimension
    gen = lattice.t_n
    lower, upper = np.zeros(d), np.ones(d)
    systems = _fm_systems(gen, lower, upper)
    a, b = _depth_interval(systems[0], np.zeros((1, 0), dtype=np.int64), 0)
    if b[0] < a[0]:
        return np.empty((0, d), dtype=np.int64)
    edges = np.linspace(a[0], b[0] + 1, threads + 1).astype(np.int64)
    share = max(1, budget // threads)

    def work(lo: int, hi: int) -> np.ndarray:
        if hi <= lo:
            return np.empty((0, d), dtype=np.int64)
        prefixes = np.arange(lo, hi, dtype=np.int64)[:, None]
        for j in range(1, d):
            aj, bj = _depth_interval(systems[j], prefixes, j)
            prefixes = _expand(prefixes, aj, bj, share, context)
            if not len(prefixes):
                return np.empty((0, d), dtype=np.int64)
        keep = _membership_mask(prefixes @ gen.T, lower, upper, np.ones(d, dtype=bool))
        return prefixes[keep]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda span: work(*span), zip(edges[:-1], edges[1:])))
    merged = np.concatenate([p for p in parts if len(p)] or [np.empty((0, d), dtype=np.int64)])
    return merged[np.lexsort(merged.T[::-1])]


def brute_force_points(lattice: FrolovLattice, budget: int = DEFAULT_BUDGET) -> LatticePointSet:
    """Unit-cube point set via the full-bounding-box oracle."""
    d = lattice.dimension
    preimages = brute_force_points_in_box(
        lattice.t_n,
        np.zeros(d),
        np.ones(d),
        open_upper=True,
        budget=budget,
        context=f"n={lattice.n:g}, d={d}",
    )
    points = preimages @ lattice.t_n.T
    preimages.setflags(write=False)
    points.setflags(write=False)
    return LatticePointSet(lattice=lattice, points=points, integer_preimages=preimages)


def iter_point_blocks(
    lattice: FrolovLattice, budget: int = DEFAULT_BUDGET, block_rows: int = 1 << 15
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Stream ``(preimages, points)`` blocks in lexicographic order.

    Memory stays bounded by the block size; used by the CLI ``--stream``
    mode for point counts too large to materialize.
    """
    d = lattice.dimension
    gen = lattice.t_n
    context = f"n={lattice.n:g}, d={d}"
    lower, upper = np.zeros(d), np.ones(d)
    open_up = np.ones(d, dtype=bool)
    systems = _fm_systems(gen, lower, upper)
    a, b = _depth_interval(systems[0], np.zeros((1, 0), dtype=np.int64), 0)
    if b[0] < a[0]:
        return
    lead = np.arange(a[0], b[0] + 1, dtype=np.int64)
    rows_per_lead = max(1, int(lattice.n ** (1.0 - 1.0 / d)))
    step = max(1, block_rows // rows_per_lead)
    for start in range(0, len(lead), step):
        prefixes = lead[start : start + step][:, None]
        for j in range(1, d):
            aj, bj = _depth_interval(systems[j], prefixes, j)
            prefixes = _expand(prefixes, aj, bj, budget, context)
            if not len(prefixes):
                break
        if not len(prefixes) or prefixes.shape[1] < d:
            continue
        keep = _membership_mask(prefixes @ gen.T, lower, upper, open_up)
        block = prefixes[keep]
        if len(block):
            block = block[np.lexsort(block.T[::-1])]
            yield block, block @ gen.T


def point_count_profile(
    spec: GeneratorSpec, n_list: Sequence[float], budget: int = DEFAULT_BUDGET
) -> list[tuple[float, int, float]]:
    """``(n, count, count - n)`` for each requested scale."""
    profile = []
    for n in n_list:
        lattice = make_lattice(spec, float(n))
        count = enumerate_points(lattice, budget=budget).count
        profile.append((float(n), count, count - float(n)))
    return profile
