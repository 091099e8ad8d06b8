"""Fooling functions: sums of dyadic atoms that every rule on a node set misses.

Given any finite node set, partition the cube into dyadic cells at levels
``|j|_1 = m + 1`` and place smooth bumps only on cells containing no node.
The resulting function evaluates to exactly zero at every node (supports
are open cells, so this is exact in floating point, not approximate),
while its integral has a known closed form.  Four coefficient patterns
cover the Banach and quasi-Banach parameter ranges.

Two normalization caveats, both deliberate: the constant that would make
the construction exactly norm-one depends on an inequality with an unknown
implicit constant, so coefficients use constant 1 and only the decay rate
of the integral is meaningful (a norm surrogate is reported instead); and
boundary cells (index 0 per axis) are never used, which wastes a thin
shell of cells but keeps the cell index set faithful to the construction.

Note the rule-vs-rules gap: the built function vanishes at the given nodes,
so it defeats every weighted rule using those nodes, but the demo does not
search over node sets.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .cubature import fit_rate, FitResult, check_schedule
from .enumeration import DEFAULT_BUDGET, enumerate_points
from .errors import BudgetExceededError, CertificationError, InvalidSpecError
from .generator import GeneratorSpec, make_lattice
from .testfns import SmoothnessClass, bump_integral_1d, bump_profile

#: Cell-grid size guard for one dyadic level (bool occupancy array).
MAX_LEVEL_CELLS = 1 << 27


class Variant:
    G1 = "g1"
    G2 = "g2"
    G3 = "g3"
    G4 = "g4"
    ALL = (G1, G2, G3, G4)


@dataclass(frozen=True)
class Atom:
    """One tensor bump ``prod_i profile(2**j_i x_i - k_i)`` on its dyadic cell."""

    j: tuple[int, ...]
    k: tuple[int, ...]
    profile: Callable[[np.ndarray], np.ndarray]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = np.ones(len(x))
        for i, (ji, ki) in enumerate(zip(self.j, self.k)):
            out *= self.profile(np.ldexp(x[:, i], ji) - ki)
        return out


@dataclass(frozen=True, eq=False)
class FoolingLevel:
    """All atoms of one level ``j``, sharing a single coefficient."""

    j: tuple[int, ...]
    coefficient: float
    cells: np.ndarray  # (K, d) int64, lexsorted


@dataclass(frozen=True, eq=False)
class FoolingFunction:
    variant: str
    m: int
    smoothness: SmoothnessClass
    levels: tuple[FoolingLevel, ...]
    integral: float
    norm_surrogate: float
    nodes: np.ndarray
    profile: Callable[[np.ndarray], np.ndarray]

    @property
    def atom_count(self) -> int:
        return sum(len(level.cells) for level in self.levels)

    def atoms(self) -> Iterator[tuple[Atom, float]]:
        for level in self.levels:
            for cell in level.cells:
                yield Atom(level.j, tuple(int(c) for c in cell), self.profile), level.coefficient

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; exactly zero on non-atom cells."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        d = x.shape[1]
        out = np.zeros(len(x))
        inside = np.all((x >= 0.0) & (x < 1.0), axis=1)
        for level in self.levels:
            dims = tuple(1 << ji for ji in level.j)
            occupancy = np.zeros(int(np.prod(dims)), dtype=bool)
            flat_cells = np.ravel_multi_index(level.cells.T, dims)
            occupancy[flat_cells] = True
            idx = np.zeros((len(x), d), dtype=np.int64)
            for i, ji in enumerate(level.j):
                idx[:, i] = np.floor(np.ldexp(x[:, i], ji)).astype(np.int64)
            idx_ok = inside.copy()
            member = np.zeros(len(x), dtype=bool)
            member[idx_ok] = occupancy[np.ravel_multi_index(idx[idx_ok].T, dims)]
            if not member.any():
                continue
            values = np.full(member.sum(), level.coefficient)
            xs = x[member]
            ks = idx[member]
            for i, ji in enumerate(level.j):
                values *= self.profile(np.ldexp(xs[:, i], ji) - ks[:, i])
            out[member] += values
        return out


@dataclass(frozen=True)
class FoolingDemoRow:
    n: float
    point_count: int
    m: int
    cubature_value: float
    integral: float
    predicted_shape: float


@dataclass(frozen=True)
class FoolingDemo:
    variant: str
    smoothness: SmoothnessClass
    rows: tuple[FoolingDemoRow, ...]
    fit: FitResult | None
    fit_skipped_reason: str | None
    lower_bound_main: float
    lower_bound_log_exponent: float


# ---------------------------------------------------------------------------


def empty_cells(nodes: np.ndarray, j: Sequence[int]) -> np.ndarray:
    """Admissible cell indices at level ``j`` containing none of the nodes.

    Cells are ``[k_i 2**-j_i, (k_i + 1) 2**-j_i)`` per axis with indices
    ``k_i in {1, ..., 2**j_i - 1}`` (index 0 excluded).  A node occupies
    the cell ``k_i = floor(2**j_i x_i)``.  Returns a lexsorted (K, d) array.
    """
    j = tuple(int(v) for v in j)
    if any(ji < 1 for ji in j):
        raise InvalidSpecError(f"cell levels must be >= 1 per axis, got {j}")
    dims = tuple(1 << ji for ji in j)
    total = int(np.prod([float(v) for v in dims]))
    if total > MAX_LEVEL_CELLS:
        raise BudgetExceededError(f"level {j} needs {total:.2e} cells > {MAX_LEVEL_CELLS:.2e}")
    nodes = np.atleast_2d(np.asarray(nodes, dtype=np.float64))
    if nodes.size and nodes.shape[1] != len(j):
        raise InvalidSpecError(f"nodes are {nodes.shape[1]}-d, level index is {len(j)}-d")
    occupied = np.zeros(dims, dtype=bool)
    if nodes.size:
        in_cube = np.all((nodes >= 0.0) & (nodes < 1.0), axis=1)
        pts = nodes[in_cube]
        if len(pts):
            idx = tuple(
                np.floor(np.ldexp(pts[:, i], ji)).astype(np.int64) for i, ji in enumerate(j)
            )
            occupied[idx] = True
    admissible = np.ones(dims, dtype=bool)
    for axis in range(len(j)):
        sel = [slice(None)] * len(j)
        sel[axis] = 0
        admissible[tuple(sel)] = False
    empty = admissible & ~occupied
    ks = np.argwhere(empty).astype(np.int64)
    return ks[np.lexsort(ks.T[::-1])]


def _positive_compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All ways to write ``total`` as an ordered sum of ``parts`` positive ints."""
    if parts == 1:
        return [(total,)] if total >= 1 else []
    out = []
    for first in range(1, total - parts + 2):
        for rest in _positive_compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def _balanced_level(total: int, parts: int) -> tuple[int, ...]:
    base, rem = divmod(total, parts)
    return tuple(base + 1 if i < rem else base for i in range(parts))


def _check_variant(variant: str, cls: SmoothnessClass) -> None:
    p, theta = cls.p, cls.theta
    ok = {
        Variant.G1: p >= 1.0 and theta >= 1.0,
        Variant.G2: theta < 1.0,
        Variant.G3: p < 1.0 and theta >= 1.0,
        Variant.G4: p < 1.0 and theta < 1.0,
    }
    if variant not in ok:
        raise InvalidSpecError(f"unknown variant {variant!r}; use one of {Variant.ALL}")
    if not ok[variant]:
        need = {
            Variant.G1: "p >= 1 and theta >= 1",
            Variant.G2: "theta < 1",
            Variant.G3: "p < 1 and theta >= 1",
            Variant.G4: "p < 1 and theta < 1",
        }[variant]
        raise InvalidSpecError(
            f"variant {variant} needs {need}; class has p={p:g}, theta={theta:g}"
        )


def _norm_surrogate(cls: SmoothnessClass, levels: Sequence[FoolingLevel], m: int) -> float:
    """The atomic-decomposition right-hand side with constant 1.

    ``(sum_j 2**(|j|_1 (s - 1/p) theta) (sum_k |coef|**p)**(theta/p))**(1/theta)``
    with the usual sup modifications at ``p = inf`` or ``theta = inf``.
    """
    s, p, theta = cls.s, cls.p, cls.theta
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    per_level = []
    for level in levels:
        lam, count = abs(level.coefficient), len(level.cells)
        if count == 0:
            continue
        inner = lam if math.isinf(p) else (count * lam**p) ** (1.0 / p)
        per_level.append(2.0 ** ((m + 1) * (s - inv_p)) * inner)
    if not per_level:
        return 0.0
    if math.isinf(theta):
        return max(per_level)
    return float(sum(v**theta for v in per_level) ** (1.0 / theta))


def build_fooling(
    nodes: np.ndarray,
    cls: SmoothnessClass,
    variant: str,
    m: int,
    profile: Callable[[np.ndarray], np.ndarray] = bump_profile,
) -> FoolingFunction:
    """Assemble the variant's atom sum against ``nodes`` at level sum ``m + 1``."""
    nodes = np.atleast_2d(np.asarray(nodes, dtype=np.float64))
    d = nodes.shape[1]
    if cls.s <= cls.sigma_p:
        raise InvalidSpecError(
            f"need s > sigma_p = {cls.sigma_p:g} for atoms without moment conditions"
        )
    _check_variant(variant, cls)
    if 2**m < len(nodes):
        raise InvalidSpecError(f"need 2**m >= node count, got m={m} for {len(nodes)} nodes")
    if m + 1 < d:
        raise InvalidSpecError(f"need m + 1 >= d to split levels, got m={m}, d={d}")

    s, p, theta = cls.s, cls.p, cls.theta
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_theta = 0.0 if math.isinf(theta) else 1.0 / theta
    log_weight = m ** (-(d - 1) * inv_theta) if d > 1 else 1.0
    coefficient = {
        Variant.G1: 2.0 ** (-s * m) * log_weight,
        Variant.G2: 2.0 ** (-s * m),
        Variant.G3: 2.0 ** (-s * m) * log_weight * 2.0 ** (m * inv_p),
        Variant.G4: 2.0 ** (-s * m) * 2.0 ** (m * inv_p),
    }[variant]

    if variant in (Variant.G1, Variant.G3):
        level_js = _positive_compositions(m + 1, d)
    else:
        level_js = [_balanced_level(m + 1, d)]

    levels = []
    for j in level_js:
        cells = empty_cells(nodes, j)
        if variant in (Variant.G3, Variant.G4):
            if not len(cells):
                raise CertificationError(f"no empty admissible cell at level {j}")
            cells = cells[:1]
        levels.append(FoolingLevel(j=j, coefficient=coefficient, cells=cells))

    atom_total = sum(len(level.cells) for level in levels)
    if atom_total == 0:
        raise CertificationError("every admissible cell is occupied at every level")
    phi_integral, _ = bump_integral_1d()
    integral = phi_integral**d * 2.0 ** (-(m + 1)) * coefficient * atom_total
    nodes_ro = nodes.copy()
    nodes_ro.setflags(write=False)
    return FoolingFunction(
        variant=variant,
        m=m,
        smoothness=cls,
        levels=tuple(levels),
        integral=integral,
        norm_surrogate=_norm_surrogate(cls, levels, m),
        nodes=nodes_ro,
        profile=profile,
    )


def lower_bound_demo(
    spec: GeneratorSpec,
    cls: SmoothnessClass,
    variant: str,
    n_schedule: Sequence[float],
    budget: int = DEFAULT_BUDGET,
) -> FoolingDemo:
    """Fool the lattice rule across a schedule and fit the integral decay.

    The level parameter is tied to the schedule scale (``m = ceil(log2 n) + 1``,
    raised if the point count demands it) so the built functions vary smoothly
    with ``n``; the fitted main exponent of the integral then tracks the
    predicted lower-bound shape.
    """
    sched = check_schedule(n_schedule)
    rows = []
    for n in sched:
        lattice = make_lattice(spec, n)
        points = enumerate_points(lattice, budget=budget)
        m = max(math.ceil(math.log2(n)) + 1, math.ceil(math.log2(max(points.count, 2))))
        g = build_fooling(points.points, cls, variant, m)
        q = math.fsum(np.asarray(g.evaluate(points.points)).tolist()) / n
        if q != 0.0:
            raise CertificationError(f"rule value {q!r} is not exactly zero at n={n:g}")
        d = spec.dimension
        inv_theta = 0.0 if math.isinf(cls.theta) else 1.0 / cls.theta
        shape = 2.0 ** (-m * cls.s) * (m ** ((d - 1) * (1.0 - inv_theta)) if d > 1 else 1.0)
        rows.append(
            FoolingDemoRow(
                n=n,
                point_count=points.count,
                m=m,
                cubature_value=q,
                integral=g.integral,
                predicted_shape=shape,
            )
        )
    fit, skip = fit_rate([r.n for r in rows], [r.integral for r in rows])
    inv_theta = 0.0 if math.isinf(cls.theta) else 1.0 / cls.theta
    return FoolingDemo(
        variant=variant,
        smoothness=cls,
        rows=tuple(rows),
        fit=fit,
        fit_skipped_reason=skip,
        lower_bound_main=cls.s - max(0.0, 1.0 / cls.p - 1.0),
        lower_bound_log_exponent=(spec.dimension - 1) * max(0.0, 1.0 - inv_theta),
    )
