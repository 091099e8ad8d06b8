"""Generator polynomials, certified real roots, and the scaled lattice pair.

The lattice generator is the Vandermonde matrix of the roots of an
irreducible integer polynomial with distinct real roots.  Two built-in
families are provided:

* ``STANDARD``: the monic degree-d polynomial ``prod_j (t - (2j-1)) - 1``.
  Its value at every odd integer ``1, 3, ..., 2d-1`` is exactly -1 and at
  the even midpoints of the sign-positive gaps it is at least ``3**(d-2)-1``,
  which pins down one bracketing interval per root with exact integer
  endpoints.  Signs inside the brackets are evaluated in exact integer
  arithmetic at dyadic rationals, so the isolation is certified, not
  heuristic.
* ``CHEBYSHEV``: for ``d = 2**l``, the monic integer polynomial satisfying
  ``P(2 cos t) = 2 cos(d t)`` (expanded through the three-term recurrence
  ``p_k = t p_{k-1} - p_{k-2}``).  Its roots have the closed form
  ``2 cos(pi (2i-1) / 2**(l+1))``, ``i = 1..d``, which we take as the
  reading of the ambiguous source formula; the expanded integer polynomial
  is the arbiter and the closed-form roots are Newton-polished against it.

``UNSAFE_CUSTOM`` accepts arbitrary distinct real roots for comparison
experiments.  It carries no admissibility guarantee: nothing ensures the
norm-form lower bound that every error estimate in this package leans on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CertificationError, InvalidSpecError
from .numerics import vandermonde_det

#: Residual tolerance scale: certified roots satisfy
#: |P(root)| <= max(RESIDUAL_REL * max(1, |root|**d), ulp-level noise at the root).
RESIDUAL_REL = 1e-14

#: Bracket endpoints are refined until they differ by at most this much.
BRACKET_WIDTH = 1e-13

_BISECT_BITS = 45  # 2**-45 * (initial width <= 2) <= 5.7e-14 < BRACKET_WIDTH


class Kind(enum.Enum):
    STANDARD = "standard"
    CHEBYSHEV = "chebyshev"
    UNSAFE_CUSTOM = "unsafe-custom"


@dataclass(frozen=True)
class GeneratorSpec:
    """Which generator polynomial to build.

    ``custom_roots`` is only consulted for ``Kind.UNSAFE_CUSTOM``.
    """

    dimension: int
    kind: Kind = Kind.STANDARD
    custom_roots: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        d = self.dimension
        if not isinstance(d, int) or d < 1:
            raise InvalidSpecError(f"dimension must be a positive integer, got {d!r}")
        if self.kind is Kind.CHEBYSHEV and d & (d - 1) != 0:
            raise InvalidSpecError(
                f"chebyshev generator requires a power-of-two dimension, got d={d}"
            )
        if self.kind is Kind.UNSAFE_CUSTOM:
            r = self.custom_roots
            if r is None or len(r) != d:
                raise InvalidSpecError("unsafe-custom requires exactly d roots")
            if len(set(r)) != d:
                raise InvalidSpecError("unsafe-custom roots must be distinct")
        elif self.custom_roots is not None:
            raise InvalidSpecError("custom_roots is only valid with Kind.UNSAFE_CUSTOM")


@dataclass(frozen=True)
class GeneratorPolynomial:
    """A certified generator polynomial.

    ``coefficients`` are the exact integers ``c_0..c_d`` (ascending, monic);
    ``None`` for the custom escape hatch, which has no integer form.
    ``intervals`` bracket each root with dyadic endpoints at which the
    polynomial has exactly opposite signs (integer-kind polynomials only);
    ``residuals`` are |P(root)| evaluated exactly at the binary64 roots.
    """

    dimension: int
    kind: Kind
    coefficients: tuple[int, ...] | None
    roots: tuple[float, ...]
    residuals: tuple[float, ...]
    residual_bounds: tuple[float, ...]
    intervals: tuple[tuple[float, float], ...]
    root_separation: float

    def evaluate(self, x: float) -> float:
        """Horner evaluation in binary64 (fast, noise ~ ulp of the term scale)."""
        if self.coefficients is None:
            return math.prod(x - r for r in self.roots)
        y = 0.0
        for c in reversed(self.coefficients):
            y = y * x + c
        return y

    def evaluate_exact(self, x: float) -> Fraction:
        """Exact rational value of the integer polynomial at a binary64 point."""
        if self.coefficients is None:
            raise InvalidSpecError("custom polynomials have no exact integer form")
        fx = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * fx + c
        return acc


@dataclass(frozen=True, eq=False)
class FrolovLattice:
    """The scaled generator matrix and its dual.

    ``t_n = (n det(t_tilde))**(-1/d) * t_tilde`` so that ``det(t_n) = 1/n``,
    and ``b_n = (t_n**-1).T`` generates the dual lattice.  All arrays are
    read-only; instances are immutable and safe to share across threads.
    """

    polynomial: GeneratorPolynomial
    n: float
    t_tilde: np.ndarray
    det_t_tilde: float
    t_n: np.ndarray
    b_n: np.ndarray

    @property
    def dimension(self) -> int:
        return self.polynomial.dimension


# ---------------------------------------------------------------------------
# integer polynomial expansion


def _standard_coefficients(d: int) -> list[int]:
    """Exact expansion of ``prod_{j=1..d} (t - (2j-1)) - 1``, ascending."""
    coeffs = [1]
    for j in range(1, d + 1):
        r = 2 * j - 1
        coeffs = [0] + coeffs
        for i in range(len(coeffs) - 1):
            coeffs[i] -= r * coeffs[i + 1]
    coeffs[0] -= 1
    return coeffs


def _chebyshev_coefficients(d: int) -> list[int]:
    """Exact expansion of the monic polynomial with ``P(2 cos t) = 2 cos(d t)``."""
    p_prev, p_cur = [2], [0, 1]
    if d == 0:
        return p_prev
    for _ in range(d - 1):
        p_next = [0] + p_cur
        for i in range(len(p_prev)):
            p_next[i] -= p_prev[i]
        p_prev, p_cur = p_cur, p_next
    return p_cur


# ---------------------------------------------------------------------------
# exact evaluation and certified bisection


def _eval_dyadic(coeffs: Sequence[int], p: int, k: int) -> int:
    """``P(p / 2**k) * 2**(k*deg)`` as an exact integer (sign-faithful)."""
    deg = len(coeffs) - 1
    q = 1 << k
    acc = 0
    for i in range(deg, -1, -1):
        acc = acc * p + coeffs[i] * q ** (deg - i)
    return acc


def _bisect_certified(coeffs: Sequence[int], a: int, b: int) -> tuple[float, float]:
    """Shrink the integer bracket (a, b) to width <= 2**(1-_BISECT_BITS).

    Endpoints stay dyadic rationals (exactly representable in binary64) and
    signs are evaluated exactly, so the final interval is a certificate.
    """
    k = 0
    ap, bp = a, b
    fa = _eval_dyadic(coeffs, ap, k)
    fb = _eval_dyadic(coeffs, bp, k)
    if fa == 0:
        return float(a), float(a)
    if fb == 0:
        return float(b), float(b)
    if (fa < 0) == (fb < 0):
        raise CertificationError(f"bracket ({a}, {b}) does not change sign")
    while k < _BISECT_BITS:
        ap, bp, k = 2 * ap, 2 * bp, k + 1
        mp = (ap + bp) // 2
        fm = _eval_dyadic(coeffs, mp, k)
        if fm == 0:
            x = mp / (1 << k)
            return x, x
        if (fm < 0) == (fa < 0):
            ap, fa = mp, fm
        else:
            bp = mp
    return ap / (1 << k), bp / (1 << k)


def _standard_brackets(d: int) -> list[tuple[int, int]]:
    """Integer sign-change brackets for the STANDARD polynomial.

    P = -1 at odd integers; in gaps (2j-1, 2j+1) with d-j even the product
    term is positive with midpoint value >= 3**(d-2), so P(2j) > 0 there;
    one root sits above 2d-1 and, for even d, one in (0, 1).
    """
    brackets: list[tuple[int, int]] = []
    if d % 2 == 0:
        brackets.append((0, 1))
    for j in range(1, d):
        if (d - j) % 2 == 0:
            brackets.append((2 * j - 1, 2 * j))
            brackets.append((2 * j, 2 * j + 1))
    brackets.append((2 * d - 1, 2 * d + 1))
    return brackets


def _polish(coeffs: Sequence[int], x: float) -> tuple[float, float]:
    """Newton steps with exact residuals, then a neighbor scan.

    Returns ``(root, |P(root)| exact)`` with the root correctly rounded to
    within one ulp (the derivative is evaluated in binary64, the residual
    exactly, so the iteration is noise-free down to the last bit).
    """
    deriv = [i * coeffs[i] for i in range(1, len(coeffs))]

    def dp(t: float) -> float:
        y = 0.0
        for c in reversed(deriv):
            y = y * t + c
        return y

    for _ in range(4):
        f = float(_eval_frac(coeffs, x))
        g = dp(x)
        if f == 0.0 or g == 0.0:
            break
        step = f / g
        x_new = x - step
        if x_new == x:
            break
        x = x_new
    best_x, best_r = x, abs(float(_eval_frac(coeffs, x)))
    for nb in (math.nextafter(x, math.inf), math.nextafter(x, -math.inf)):
        r = abs(float(_eval_frac(coeffs, nb)))
        if r < best_r:
            best_x, best_r = nb, r
    return best_x, best_r


def _eval_frac(coeffs: Sequence[int], x: float) -> Fraction:
    fx = Fraction(x)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * fx + c
    return acc


def _residual_bound(coeffs: Sequence[int], x: float, d: int) -> float:
    """Attainable certified residual bound at a correctly rounded root.

    ``RESIDUAL_REL * max(1, |x|**d)`` where binary64 can reach it; otherwise
    the rounding-limited level ``4 |P'(x)| ulp(x)`` (the best any binary64
    root can do when the derivative at the root is large).
    """
    deriv = [i * coeffs[i] for i in range(1, len(coeffs))]
    g = 0.0
    for c in reversed(deriv):
        g = g * x + c
    return max(RESIDUAL_REL * max(1.0, abs(x) ** d), 4.0 * abs(g) * math.ulp(x))


def _certify_interval(coeffs: Sequence[int], x: float) -> tuple[float, float]:
    """A sign-change bracket of width <= BRACKET_WIDTH around a polished root."""
    fx = _eval_frac(coeffs, x)
    if fx == 0:
        return x, x
    h = 2.0 ** (-_BISECT_BITS) * max(1.0, 2.0 ** math.ceil(math.log2(abs(x))) if x else 1.0)
    sign_x = fx > 0
    for _ in range(60):
        lo, hi = x - h, x + h
        flo, fhi = _eval_frac(coeffs, lo), _eval_frac(coeffs, hi)
        if flo == 0:
            return lo, lo
        if fhi == 0:
            return hi, hi
        if (flo > 0) != (fhi > 0):
            # shrink back down keeping the sign change
            while hi - lo > BRACKET_WIDTH:
                mid = 0.5 * (lo + hi)
                fm = _eval_frac(coeffs, mid)
                if fm == 0:
                    return mid, mid
                if (fm > 0) == (flo > 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            return lo, hi
        h *= 2.0
    raise CertificationError(f"no sign change found near root {x!r}")


# ---------------------------------------------------------------------------
# public operations


def build_polynomial(spec: GeneratorSpec) -> GeneratorPolynomial:
    """Expand the generator polynomial and certify its real roots."""
    d = spec.dimension

    if spec.kind is Kind.UNSAFE_CUSTOM:
        roots = tuple(sorted(float(r) for r in spec.custom_roots))  # type: ignore[arg-type]
        sep = min((roots[i + 1] - roots[i] for i in range(d - 1)), default=math.inf)
        nan = float("nan")
        return GeneratorPolynomial(
            dimension=d,
            kind=spec.kind,
            coefficients=None,
            roots=roots,
            residuals=(0.0,) * d,
            residual_bounds=(nan,) * d,
            intervals=tuple((r, r) for r in roots),
            root_separation=sep,
        )

    if spec.kind is Kind.STANDARD:
        coeffs = _standard_coefficients(d)
        for j in range(1, d + 1):
            if _eval_dyadic(coeffs, 2 * j - 1, 0) != -1:
                raise CertificationError("expanded polynomial is not -1 at odd integers")
        found = []
        for a, b in _standard_brackets(d):
            lo, hi = _bisect_certified(coeffs, a, b)
            x, res = _polish(coeffs, 0.5 * (lo + hi))
            found.append((x, res, (lo, hi)))
    else:
        coeffs = _chebyshev_coefficients(d)
        ell = d.bit_length() - 1
        closed = [2.0 * math.cos(math.pi * (2 * i - 1) / 2 ** (ell + 1)) for i in range(1, d + 1)]
        found = []
        for x0 in closed:
            x, res = _polish(coeffs, x0)
            found.append((x, res, _certify_interval(coeffs, x)))

    found.sort(key=lambda t: t[0])
    roots = tuple(t[0] for t in found)
    if len(set(roots)) != d:
        raise CertificationError(f"isolated {len(set(roots))} distinct roots, expected {d}")
    residuals = tuple(t[1] for t in found)
    intervals = tuple(t[2] for t in found)
    bounds = tuple(_residual_bound(coeffs, x, d) for x in roots)
    for res, bnd in zip(residuals, bounds):
        if res > bnd:
            raise CertificationError(f"root residual {res:.3e} exceeds bound {bnd:.3e}")
    sep = math.inf
    for i in range(d - 1):
        sep = min(sep, intervals[i + 1][0] - intervals[i][1])
    return GeneratorPolynomial(
        dimension=d,
        kind=spec.kind,
        coefficients=tuple(coeffs),
        roots=roots,
        residuals=residuals,
        residual_bounds=bounds,
        intervals=intervals,
        root_separation=sep,
    )


def assemble_lattice(poly: GeneratorPolynomial, n: float) -> FrolovLattice:
    """Scale the Vandermonde generator to determinant 1/n and build its dual."""
    if not (n >= 1.0) or not math.isfinite(n):
        raise InvalidSpecError(f"scale n must be a finite real >= 1, got {n!r}")
    d = poly.dimension
    xi = np.asarray(poly.roots, dtype=np.float64)
    t_tilde = np.vander(xi, d, increasing=True)

    det = vandermonde_det_of(poly)
    scale = (n * det) ** (-1.0 / d)
    t_n = scale * t_tilde

    inv = np.linalg.inv(t_n)
    eye = np.eye(d)
    for _ in range(2):
        inv = inv + inv @ (eye - t_n @ inv)
    b_n = inv.T.copy()

    det_t_n = det * scale**d
    if abs(det_t_n * n - 1.0) > 1e-10:
        raise CertificationError(f"det(t_n) * n deviates from 1 by {abs(det_t_n*n-1):.2e}")
    resid = np.abs(t_n.T @ b_n - eye).max()
    if resid > 1e-10 * np.abs(b_n).max():
        raise CertificationError(f"t_n^T b_n residual {resid:.2e} too large")

    for arr in (t_tilde, t_n, b_n):
        arr.setflags(write=False)
    return FrolovLattice(
        polynomial=poly, n=float(n), t_tilde=t_tilde, det_t_tilde=det, t_n=t_n, b_n=b_n
    )


def vandermonde_det_of(poly: GeneratorPolynomial) -> float:
    """``det(t_tilde)`` from the closed-form pairwise-difference product."""
    return vandermonde_det(poly.roots)


def make_lattice(spec: GeneratorSpec, n: float) -> FrolovLattice:
    """Convenience: ``assemble_lattice(build_polynomial(spec), n)``."""
    return assemble_lattice(_cached_polynomial(spec), n)


@lru_cache(maxsize=64)
def _cached_polynomial(spec: GeneratorSpec) -> GeneratorPolynomial:
    return build_polynomial(spec)


# ---------------------------------------------------------------------------
# extended-precision mirror (used by dual-lattice product certification)


@lru_cache(maxsize=32)
def _longdouble_state(poly: GeneratorPolynomial, n: float):
    d = poly.dimension
    if poly.coefficients is not None:
        coeffs = [np.longdouble(c) for c in poly.coefficients]
        deriv = [np.longdouble(i) * c for i, c in enumerate(poly.coefficients) if i > 0]
        xs = []
        for r in poly.roots:
            x = np.longdouble(r)
            for _ in range(3):
                f = np.longdouble(0)
                for c in reversed(coeffs):
                    f = f * x + c
                g = np.longdouble(0)
                for c in reversed(deriv):
                    g = g * x + c
                if g != 0:
                    x = x - f / g
            xs.append(x)
        xi = np.array(xs, dtype=np.longdouble)
    else:
        xi = np.array(poly.roots, dtype=np.longdouble)

    t_tilde = np.empty((d, d), dtype=np.longdouble)
    for j in range(d):
        t_tilde[:, j] = xi**j
    det = np.longdouble(1)
    for i in range(d):
        for j in range(i + 1, d):
            det *= xi[j] - xi[i]
    scale = (np.longdouble(n) * det) ** (np.longdouble(-1) / d)
    t_n = scale * t_tilde
    inv = np.linalg.inv(np.asarray(t_n, dtype=np.float64)).astype(np.longdouble)
    eye = np.eye(d, dtype=np.longdouble)
    for _ in range(3):
        inv = inv + inv @ (eye - t_n @ inv)
    return t_n, inv.T.copy(), det


def longdouble_matrices(lattice: FrolovLattice) -> tuple[np.ndarray, np.ndarray, np.longdouble]:
    """``(t_n, b_n, det_t_tilde)`` recomputed in 80-bit extended precision.

    Large integer preimages multiply entry-level rounding of ``b_n`` into
    absolute errors comparable to the smallest dual coordinates; binary64
    alone cannot certify the norm-product bound at the 1e-8 level, extended
    precision can.
    """
    return _longdouble_state(lattice.polynomial, lattice.n)
