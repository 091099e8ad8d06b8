import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from frolov import (
    CertificationError,
    FrolovLattice,
    GeneratorSpec,
    InvalidSpecError,
    Kind,
    assemble_lattice,
    build_polynomial,
)
from frolov.generator import longdouble_matrices


def sympy_standard_coeffs(d):
    t = sympy.Symbol("t")
    poly = sympy.prod([t - (2 * j - 1) for j in range(1, d + 1)]) - 1
    return tuple(int(c) for c in reversed(sympy.Poly(sympy.expand(poly), t).all_coeffs()))


def sympy_chebyshev_coeffs(d):
    t = sympy.Symbol("t")
    poly = sympy.expand(2 * sympy.chebyshevt(d, t / 2))
    return tuple(int(c) for c in reversed(sympy.Poly(poly, t).all_coeffs()))


@pytest.mark.parametrize("d", range(1, 7))
def test_standard_coefficients_match_symbolic_oracle(d):
    poly = build_polynomial(GeneratorSpec(d, Kind.STANDARD))
    assert poly.coefficients == sympy_standard_coeffs(d)


@pytest.mark.parametrize("d", [1, 2, 4, 8])
def test_chebyshev_coefficients_match_symbolic_oracle(d):
    poly = build_polynomial(GeneratorSpec(d, Kind.CHEBYSHEV))
    assert poly.coefficients == sympy_chebyshev_coeffs(d)


def test_d2_standard_examples():
    poly = build_polynomial(GeneratorSpec(2, Kind.STANDARD))
    # t^2 - 4t + 2, roots 2 +- sqrt(2) (quadratic-formula oracle)
    assert poly.coefficients == (2, -4, 1)
    assert poly.roots[0] == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-12)
    assert poly.roots[1] == pytest.approx(2.0 + math.sqrt(2.0), abs=1e-12)


def test_d3_standard_coefficients():
    poly = build_polynomial(GeneratorSpec(3, Kind.STANDARD))
    assert poly.coefficients == (-16, 23, -9, 1)


def test_d1_polynomials():
    std = build_polynomial(GeneratorSpec(1, Kind.STANDARD))
    assert std.coefficients == (-2, 1) and std.roots == (2.0,)
    cheb = build_polynomial(GeneratorSpec(1, Kind.CHEBYSHEV))
    assert cheb.coefficients == (0, 1) and cheb.roots == (0.0,)


def test_chebyshev_closed_form_roots():
    for d in (2, 4, 8):
        ell = d.bit_length() - 1
        closed = sorted(
            2.0 * math.cos(math.pi * (2 * i - 1) / 2 ** (ell + 1)) for i in range(1, d + 1)
        )
        poly = build_polynomial(GeneratorSpec(d, Kind.CHEBYSHEV))
        assert poly.roots == pytest.approx(closed, abs=1e-12)
        # closed-form values, before polishing, already sit on the polynomial
        for x in closed:
            fx = Fraction(x)
            acc = Fraction(0)
            for c in reversed(poly.coefficients):
                acc = acc * fx + c
            assert abs(acc) <= Fraction(1, 10**12)


@pytest.mark.parametrize("d", range(1, 9))
def test_standard_value_at_odd_integers_is_minus_one(d):
    poly = build_polynomial(GeneratorSpec(d, Kind.STANDARD))
    for j in range(1, d + 1):
        assert poly.evaluate_exact(float(2 * j - 1)) == -1


@pytest.mark.parametrize("d", range(1, 9))
def test_root_certification(d):
    poly = build_polynomial(GeneratorSpec(d, Kind.STANDARD))
    assert len(set(poly.roots)) == d
    for (lo, hi), res, bound in zip(poly.intervals, poly.residuals, poly.residual_bounds):
        assert hi - lo <= 1e-13
        assert res <= bound
        if lo != hi:
            assert (poly.evaluate_exact(lo) > 0) != (poly.evaluate_exact(hi) > 0)
    if d > 1:
        gaps = [poly.roots[i + 1] - poly.roots[i] for i in range(d - 1)]
        assert 0.0 < poly.root_separation <= min(gaps)


@pytest.mark.parametrize("d", range(1, 7))
def test_residuals_within_scaled_tolerance(d):
    poly = build_polynomial(GeneratorSpec(d, Kind.STANDARD))
    for x, res in zip(poly.roots, poly.residuals):
        assert res <= 1e-12 * max(1.0, abs(x) ** d)


def test_invalid_specs_rejected():
    with pytest.raises(InvalidSpecError):
        GeneratorSpec(0)
    with pytest.raises(InvalidSpecError):
        GeneratorSpec(3, Kind.CHEBYSHEV)
    with pytest.raises(InvalidSpecError):
        GeneratorSpec(2, Kind.UNSAFE_CUSTOM)
    with pytest.raises(InvalidSpecError):
        GeneratorSpec(2, Kind.UNSAFE_CUSTOM, custom_roots=(1.0, 1.0))
    with pytest.raises(InvalidSpecError):
        GeneratorSpec(2, Kind.STANDARD, custom_roots=(1.0, 2.0))


# ---------------------------------------------------------------------------
# lattice assembly


def test_d2_determinant_closed_form():
    lattice = assemble_lattice(build_polynomial(GeneratorSpec(2)), 100.0)
    assert lattice.det_t_tilde == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-12)


def test_d3_determinant_matches_lu_oracle():
    lattice = assemble_lattice(build_polynomial(GeneratorSpec(3)), 100.0)
    sign, logdet = np.linalg.slogdet(lattice.t_tilde)
    assert sign == 1.0
    assert lattice.det_t_tilde == pytest.approx(math.exp(logdet), rel=1e-10)


def test_d1_scalar_lattice():
    lattice = assemble_lattice(build_polynomial(GeneratorSpec(1)), 5.0)
    assert lattice.t_n[0, 0] == pytest.approx(0.2, rel=1e-14)
    assert lattice.b_n[0, 0] == pytest.approx(5.0, rel=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("n", [2.0**8, 2.0**12, 2.0**16])
def test_lattice_invariants(d, n):
    lattice = assemble_lattice(build_polynomial(GeneratorSpec(d)), n)
    det_t_n = np.linalg.det(lattice.t_n)
    assert abs(det_t_n * n - 1.0) <= 1e-10
    resid = np.abs(lattice.t_n.T @ lattice.b_n - np.eye(d)).max()
    assert resid <= 1e-10 * np.abs(lattice.b_n).max()


def test_rejects_small_n():
    poly = build_polynomial(GeneratorSpec(2))
    with pytest.raises(InvalidSpecError):
        assemble_lattice(poly, 0.5)


def test_unsafe_custom_lattice_assembles():
    spec = GeneratorSpec(2, Kind.UNSAFE_CUSTOM, custom_roots=(0.5, 2.75))
    lattice = assemble_lattice(build_polynomial(spec), 64.0)
    assert isinstance(lattice, FrolovLattice)
    assert lattice.det_t_tilde == pytest.approx(2.25, rel=1e-13)


def test_longdouble_matrices_refine_float64():
    lattice = assemble_lattice(build_polynomial(GeneratorSpec(3)), 2.0**10)
    t_ld, b_ld, det_ld = longdouble_matrices(lattice)
    assert float(det_ld) == pytest.approx(lattice.det_t_tilde, rel=1e-13)
    resid = np.abs(t_ld.T @ b_ld - np.eye(3, dtype=np.longdouble)).max()
    assert float(resid) < 1e-15
