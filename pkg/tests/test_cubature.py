import math

import numpy as np
import pytest

from frolov import (
    GeneratorSpec,
    InvalidSpecError,
    TestFunction as Integrand,
    compare_generators,
    enumerate_points,
    fit_rate,
    geometric_schedule,
    integrate,
    make_hat,
    make_lattice,
    run_study,
)
from frolov.testfns import Structure


def test_d1_n5_hat_by_hand():
    # points 0, .2, .4, .6, .8; hat values 0, .2, .4, .4, .2; sum 1.2
    lattice = make_lattice(GeneratorSpec(1), 5.0)
    result = integrate(lattice, make_hat(1))
    assert result.value == pytest.approx(0.24, abs=1e-15)
    assert result.abs_error == pytest.approx(0.01, abs=1e-15)
    assert result.point_count == 5


def test_zero_function():
    zero = Integrand(
        name="zero",
        arity=2,
        evaluate=lambda x: np.zeros(len(np.atleast_2d(x))),
        reference_integral=0.0,
        reference_error_bound=0.0,
        declared_class=None,
        structure=Structure.TENSOR_PRODUCT,
    )
    result = integrate(make_lattice(GeneratorSpec(2), 200.0), zero)
    assert result.value == 0.0 and result.abs_error == 0.0 and result.raw_sum == 0.0


def test_arity_mismatch():
    with pytest.raises(InvalidSpecError):
        integrate(make_lattice(GeneratorSpec(2), 100.0), make_hat(3))


def test_linearity_on_shared_points():
    lattice = make_lattice(GeneratorSpec(2), 2.0**10)
    points = enumerate_points(lattice)
    hat = make_hat(2)
    from frolov import make_bump

    bump = make_bump(2)
    a, b = 2.5, -1.25
    combo = Integrand(
        name="combo",
        arity=2,
        evaluate=lambda x: a * hat.evaluate(x) + b * bump.evaluate(x),
        reference_integral=a * hat.reference_integral + b * bump.reference_integral,
        reference_error_bound=0.0,
        declared_class=None,
        structure=Structure.TENSOR_PRODUCT,
    )
    v_combo = integrate(lattice, combo, point_set=points).value
    v_hat = integrate(lattice, hat, point_set=points).value
    v_bump = integrate(lattice, bump, point_set=points).value
    assert v_combo == pytest.approx(a * v_hat + b * v_bump, rel=1e-12)


def test_weight_is_scale_not_point_count():
    # n = 256 enumerates 259 points, so the two normalizations are far apart
    lattice = make_lattice(GeneratorSpec(2), 256.0)
    points = enumerate_points(lattice)
    assert points.count != 256
    result = integrate(lattice, make_hat(2), point_set=points)
    assert result.value == result.raw_sum / 256.0
    assert result.value * 256.0 == pytest.approx(result.raw_sum, rel=4e-16)
    assert abs(result.value - result.raw_sum / points.count) > 1e-6 * abs(result.value)


def test_fit_recovers_synthetic_exactly():
    ns = [2.0**k for k in range(8, 21)]
    for s, beta in ((2.0, 1.0), (0.4, 1.2), (1.0, 0.0)):
        errors = [3.7 * n ** (-s) * math.log(n) ** beta for n in ns]
        fit, skip = fit_rate(ns, errors)
        assert skip is None
        assert fit.main_rate == pytest.approx(s, abs=1e-6)
        assert fit.log_exponent == pytest.approx(beta, abs=1e-6)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-9)


def test_fit_exclusions():
    ns = [8.0] + [2.0**k for k in range(4, 10)]
    errors = [1e-2, 1e-3, 0.0, 1e-5, 1e-16, 1e-7, 1e-8]
    fit, skip = fit_rate(ns, errors, noise_floor=1e-15)
    assert skip is None
    reasons = {n: reason for n, reason in fit.excluded}
    assert reasons[8.0] == "n below 16"
    assert reasons[32.0] == "zero error"
    assert reasons[128.0] == "at noise floor"
    assert fit.n_used == 4
    fit2, skip2 = fit_rate([16.0, 32.0], [1e-3, 1e-4])
    assert fit2 is None and "usable" in skip2


def test_schedule_validation():
    assert geometric_schedule(256.0, 1024.0, 2.0) == [256.0, 512.0, 1024.0]
    with pytest.raises(InvalidSpecError):
        geometric_schedule(256.0, 1024.0, 1.5)
    with pytest.raises(InvalidSpecError):
        run_study(GeneratorSpec(1), make_hat(1), [64.0, 96.0])


def test_short_schedule_skips_fit():
    study = run_study(GeneratorSpec(1), make_hat(1), [32.0, 64.0])
    assert study.fit is None
    assert "usable" in study.fit_skipped_reason


def test_study_slope_sign_on_hat():
    # monotone information: the regression slope is positive even though
    # per-step errors may wiggle
    study = run_study(GeneratorSpec(2), make_hat(2), [2.0**k for k in range(6, 13)])
    assert study.fit is not None
    assert study.fit.main_rate > 0.5
    assert study.prediction is not None and study.prediction.main_rate == 2.0
    assert [r.n for r in study.records] == sorted(r.n for r in study.records)


def test_compare_generators_d2_same_lattice():
    # in dimension 2 the chebyshev polynomial is the standard one shifted by
    # the integer 2, so both spawn the same lattice and identical studies
    comparison = compare_generators(make_hat(2), [2.0**k for k in range(6, 10)])
    for a, b in zip(comparison.standard.records, comparison.chebyshev.records):
        assert a.point_count == b.point_count
        assert a.value == pytest.approx(b.value, rel=1e-13)
    assert comparison.error_ratios == pytest.approx([1.0] * 4, rel=1e-6)


def test_compare_generators_d4_genuinely_differ():
    std = enumerate_points(make_lattice(GeneratorSpec(4), 2.0**10))
    from frolov import Kind

    cheb = enumerate_points(make_lattice(GeneratorSpec(4, Kind.CHEBYSHEV), 2.0**10))
    assert std.count != cheb.count  # distinct lattices hit distinct counts here


def test_compare_generators_rejects_odd_dimension():
    with pytest.raises(InvalidSpecError):
        compare_generators(make_hat(3), [64.0, 128.0])
