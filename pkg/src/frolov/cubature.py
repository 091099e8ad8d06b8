"""Equal-weight lattice cubature and empirical convergence studies.

The rule averages integrand values over the lattice points inside the
half-open unit cube and divides by the scale ``n`` (not by the point
count; the two differ by a logarithmic-order term and confusing them
silently shifts every measured rate).  Sums are exact via ``math.fsum``:
at a million points a naive accumulation loses about six digits against
errors of size 1e-8.

Rate fitting regresses ``log(abs_error)`` on ``{1, -log n, log log n}``.
The two slope regressors are nearly collinear over desk-scale windows, so
on noisy data ordinary least squares splits the decay between them almost
arbitrarily even when the fitted curve is excellent.  The estimator
therefore adds a ridge penalty on the log-exponent coefficient weighted by
the residual variance of the unpenalized fit: exact model data (residual
zero) is recovered to machine accuracy, while oscillation-dominated data
shrinks the ill-determined log exponent toward zero instead of letting it
contaminate the main rate.  Records at the measurement noise floor
(roundoff of the reference value) are excluded from the fit and flagged,
as are exact zeros; they measure arithmetic, not cubature error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .enumeration import DEFAULT_BUDGET, LatticePointSet, enumerate_points
from .errors import InvalidSpecError
from .generator import FrolovLattice, GeneratorSpec, Kind, make_lattice
from .testfns import RatePrediction, SmoothnessClass, TestFunction, predict_rate

#: Errors at or below NOISE_FLOOR_ULPS * eps * |reference| are fit-excluded.
NOISE_FLOOR_ULPS = 64.0

#: Ridge weight on the log-exponent is RIDGE_KAPPA * (OLS residual variance).
RIDGE_KAPPA = 4.0

#: log log n is ill-conditioned below this; such records never enter fits.
MIN_FIT_N = 16.0


@dataclass(frozen=True)
class CubatureResult:
    """One application of the rule: ``value = raw_sum / n`` by construction."""

    n: float
    point_count: int
    value: float
    reference: float
    abs_error: float
    raw_sum: float


@dataclass(frozen=True)
class FitResult:
    main_rate: float
    log_exponent: float
    intercept: float
    r_squared: float
    n_used: int
    ridge_weight: float
    excluded: tuple[tuple[float, str], ...]


@dataclass(frozen=True)
class ConvergenceStudy:
    function_name: str
    smoothness: SmoothnessClass | None
    records: tuple[CubatureResult, ...]
    fit: FitResult | None
    fit_skipped_reason: str | None
    prediction: RatePrediction | None


@dataclass(frozen=True)
class GeneratorComparison:
    standard: ConvergenceStudy
    chebyshev: ConvergenceStudy
    error_ratios: tuple[float, ...]


# ---------------------------------------------------------------------------


def integrate(
    lattice: FrolovLattice,
    f: TestFunction,
    point_set: LatticePointSet | None = None,
    budget: int = DEFAULT_BUDGET,
) -> CubatureResult:
    """Apply the rule to ``f``, reusing ``point_set`` when supplied."""
    if f.arity != lattice.dimension:
        raise InvalidSpecError(
            f"arity mismatch: function is {f.arity}-d, lattice is {lattice.dimension}-d"
        )
    if point_set is None:
        point_set = enumerate_points(lattice, budget=budget)
    elif point_set.lattice is not lattice:
        raise InvalidSpecError("point set was enumerated for a different lattice")
    values = np.asarray(f.evaluate(point_set.points), dtype=np.float64)
    raw = math.fsum(values.tolist())
    value = raw / lattice.n
    return CubatureResult(
        n=lattice.n,
        point_count=point_set.count,
        value=value,
        reference=f.reference_integral,
        abs_error=abs(value - f.reference_integral),
        raw_sum=raw,
    )


def fit_rate(
    ns: Sequence[float],
    errors: Sequence[float],
    noise_floor: float = 0.0,
    kappa: float = RIDGE_KAPPA,
) -> tuple[FitResult | None, str | None]:
    """Fit ``error ~ C * n**-main * (log n)**log_exp``; see module docstring.

    Returns ``(fit, skip_reason)``; the fit is ``None`` when fewer than four
    records survive exclusion.
    """
    ns = np.asarray(ns, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    excluded: list[tuple[float, str]] = []
    keep = np.ones(len(ns), dtype=bool)
    for i, (n, e) in enumerate(zip(ns, errors)):
        if e == 0.0:
            keep[i] = False
            excluded.append((float(n), "zero error"))
        elif e <= noise_floor:
            keep[i] = False
            excluded.append((float(n), "at noise floor"))
        elif n < MIN_FIT_N:
            keep[i] = False
            excluded.append((float(n), "n below 16"))
    if keep.sum() < 4:
        return None, f"only {int(keep.sum())} usable records (need 4)"
    nk, ek = ns[keep], errors[keep]
    design = np.stack([np.ones(len(nk)), -np.log(nk), np.log(np.log(nk))], axis=1)
    y = np.log(ek)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    sigma2 = float(resid @ resid) / max(1, len(y) - 3)
    lam = kappa * sigma2
    if lam > 0.0:
        penalty = np.zeros((1, 3))
        penalty[0, 2] = 1.0
        aug = np.vstack([design, math.sqrt(lam) * penalty])
        coef, *_ = np.linalg.lstsq(aug, np.concatenate([y, [0.0]]), rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return (
        FitResult(
            main_rate=float(coef[1]),
            log_exponent=float(coef[2]),
            intercept=float(coef[0]),
            r_squared=r2,
            n_used=int(keep.sum()),
            ridge_weight=lam,
            excluded=tuple(excluded),
        ),
        None,
    )


def check_schedule(n_schedule: Sequence[float]) -> list[float]:
    """Validate a geometric schedule (ratio >= 2 between consecutive scales)."""
    sched = [float(n) for n in n_schedule]
    if any(n < 1.0 for n in sched):
        raise InvalidSpecError("every schedule entry must be >= 1")
    if sorted(sched) != sched:
        raise InvalidSpecError("schedule must be ascending")
    for a, b in zip(sched, sched[1:]):
        if b < 2.0 * a * (1.0 - 1e-12):
            raise InvalidSpecError(f"schedule ratio {b/a:g} below 2 between {a:g} and {b:g}")
    return sched


def geometric_schedule(n_min: float, n_max: float, ratio: float = 2.0) -> list[float]:
    if ratio < 2.0:
        raise InvalidSpecError(f"schedule ratio must be >= 2, got {ratio:g}")
    if n_min < 1.0 or n_max < n_min:
        raise InvalidSpecError(f"need 1 <= nmin <= nmax, got {n_min:g}, {n_max:g}")
    out = []
    n = float(n_min)
    while n <= n_max * (1.0 + 1e-12):
        out.append(n)
        n *= ratio
    return out


def run_study(
    spec: GeneratorSpec,
    f: TestFunction,
    n_schedule: Sequence[float],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> ConvergenceStudy:
    """Integrate ``f`` across the schedule and fit the error decay."""
    sched = check_schedule(n_schedule)
    records = []
    for n in sched:
        lattice = make_lattice(spec, n)
        points = enumerate_points(lattice, budget=budget, threads=threads)
        records.append(integrate(lattice, f, point_set=points))
    floor = NOISE_FLOOR_ULPS * np.finfo(np.float64).eps * abs(f.reference_integral)
    fit, skip = fit_rate([r.n for r in records], [r.abs_error for r in records], noise_floor=floor)
    prediction = None
    if f.declared_class is not None:
        prediction = predict_rate(f.declared_class, f.arity)
    return ConvergenceStudy(
        function_name=f.name,
        smoothness=f.declared_class,
        records=tuple(records),
        fit=fit,
        fit_skipped_reason=skip,
        prediction=prediction,
    )


def compare_generators(
    f: TestFunction,
    n_schedule: Sequence[float],
    budget: int = DEFAULT_BUDGET,
    threads: int = 1,
) -> GeneratorComparison:
    """The same study under the standard and Chebyshev generators.

    Requires a power-of-two dimension (the Chebyshev family exists only
    there).  Note that in dimension 2 the two generator polynomials differ
    by the integer shift ``t -> t - 2``, so they span the *same* lattice
    and the studies coincide; from dimension 4 on they genuinely differ.
    """
    d = f.arity
    if d & (d - 1) != 0:
        raise InvalidSpecError(f"generator comparison needs a power-of-two dimension, got {d}")
    std = run_study(GeneratorSpec(d, Kind.STANDARD), f, n_schedule, budget, threads)
    cheb = run_study(GeneratorSpec(d, Kind.CHEBYSHEV), f, n_schedule, budget, threads)
    ratios = tuple(
        (a.abs_error / b.abs_error) if b.abs_error else math.inf
        for a, b in zip(std.records, cheb.records)
    )
    return GeneratorComparison(standard=std, chebyshev=cheb, error_ratios=ratios)
