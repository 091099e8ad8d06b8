import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from frolov import (
    CertificationError,
    GeneratorSpec,
    InvalidSpecError,
    Scale,
    SmoothnessClass,
    Variant,
    build_fooling,
    empty_cells,
    enumerate_points,
    lower_bound_demo,
    make_lattice,
)

INF = math.inf
B21INF = SmoothnessClass(2.0, 1.0, INF, Scale.B)


def test_empty_cells_no_nodes():
    cells = empty_cells(np.empty((0, 2)), (1, 1))
    assert cells.tolist() == [[1, 1]]


def test_empty_cells_excludes_occupied():
    nodes = np.array([[0.6, 0.6]])  # cell (1, 1) at level (1, 1)
    assert empty_cells(nodes, (1, 1)).tolist() == []
    nodes = np.array([[0.6, 0.3]])  # cell (1, 0): inadmissible anyway
    assert empty_cells(nodes, (1, 1)).tolist() == [[1, 1]]


def test_empty_cells_rejects_level_zero():
    with pytest.raises(InvalidSpecError):
        empty_cells(np.empty((0, 2)), (0, 3))


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=1, max_value=4),
    st.integers(min_value=0, max_value=40),
)
def test_empty_cells_pigeonhole(j1, j2, n_nodes):
    rng = np.random.default_rng(j1 * 100 + j2 * 10 + n_nodes)
    nodes = rng.uniform(0.0, 1.0, size=(n_nodes, 2))
    cells = empty_cells(nodes, (j1, j2))
    admissible = (2**j1 - 1) * (2**j2 - 1)
    assert len(cells) >= admissible - n_nodes
    assert len(cells) <= admissible


def test_empty_cells_frolov_level_seven():
    # summed over the level set |j|_1 = 7, at least 2^7 - 2^6 cells are free
    points = enumerate_points(make_lattice(GeneratorSpec(2), 64.0)).points
    per_level = {}
    for j1 in range(1, 7):
        per_level[(j1, 7 - j1)] = len(empty_cells(points, (j1, 7 - j1)))
    assert per_level == {(1, 6): 31, (2, 5): 45, (3, 4): 52, (4, 3): 52, (5, 2): 45, (6, 1): 31}
    assert sum(per_level.values()) >= 2**7 - 2**6


# ---------------------------------------------------------------------------


def test_variant_class_compatibility():
    nodes = np.array([[0.3, 0.7]])
    with pytest.raises(InvalidSpecError):
        build_fooling(nodes, B21INF, Variant.G2, m=4)  # G2 needs theta < 1
    with pytest.raises(InvalidSpecError):
        build_fooling(nodes, B21INF, Variant.G3, m=4)  # G3 needs p < 1
    with pytest.raises(InvalidSpecError):
        build_fooling(nodes, SmoothnessClass(2.0, 0.5, 0.5), Variant.G1, m=4)
    with pytest.raises(InvalidSpecError):
        build_fooling(nodes, B21INF, "g9", m=4)


def test_rejects_m_too_small_and_shallow_smoothness():
    nodes = np.random.default_rng(0).uniform(size=(9, 2))
    with pytest.raises(InvalidSpecError):
        build_fooling(nodes, B21INF, Variant.G1, m=3)  # 2^3 < 9 nodes
    with pytest.raises(InvalidSpecError):
        # s <= sigma_p = 1/p - 1 = 3
        build_fooling(nodes, SmoothnessClass(2.0, 0.25, 0.5), Variant.G4, m=6)


def test_g1_structure_and_zero_at_nodes():
    points = enumerate_points(make_lattice(GeneratorSpec(2), 64.0)).points
    g = build_fooling(points, B21INF, Variant.G1, m=7)
    # uniform coefficient across every level, value 2^{-sm} (theta = inf)
    coefs = {level.coefficient for level in g.levels}
    assert coefs == {2.0 ** (-2.0 * 7)}
    assert {level.j for level in g.levels} == {(j1, 8 - j1) for j1 in range(1, 8)}
    assert np.all(g.evaluate(points) == 0.0)
    assert g.integral > 0.0


def test_g2_integral_closed_form():
    points = enumerate_points(make_lattice(GeneratorSpec(2), 64.0)).points
    cls = SmoothnessClass(1.5, 2.0, 0.5, Scale.B)
    m = 7
    g = build_fooling(points, cls, Variant.G2, m=m)
    assert len(g.levels) == 1
    j = g.levels[0].j
    assert sum(j) == m + 1
    n_cells = len(empty_cells(points, j))
    from frolov.testfns import bump_integral_1d

    phi = bump_integral_1d()[0]
    expected = 2.0 ** (-1.5 * m) * n_cells * 2.0 ** (-(m + 1)) * phi**2
    assert g.integral == pytest.approx(expected, rel=1e-14)
    assert np.all(g.evaluate(points) == 0.0)


def test_g4_single_atom():
    points = enumerate_points(make_lattice(GeneratorSpec(2), 64.0)).points
    cls = SmoothnessClass(3.0, 0.5, 0.5, Scale.B)  # sigma_p = 1, s > 1
    m = 7
    g = build_fooling(points, cls, Variant.G4, m=m)
    assert g.atom_count == 1
    from frolov.testfns import bump_integral_1d

    phi = bump_integral_1d()[0]
    expected = 2.0 ** ((-3.0 + 2.0) * m) * 2.0 ** (-(m + 1)) * phi**2
    assert g.integral == pytest.approx(expected, rel=1e-14)
    assert np.all(g.evaluate(points) == 0.0)


def test_g3_one_cell_per_level():
    points = enumerate_points(make_lattice(GeneratorSpec(2), 64.0)).points
    cls = SmoothnessClass(3.0, 0.5, 2.0, Scale.B)
    g = build_fooling(points, cls, Variant.G3, m=7)
    assert all(len(level.cells) == 1 for level in g.levels)
    assert len(g.levels) == 7
    assert np.all(g.evaluate(points) == 0.0)


def test_integral_matches_quadrature_of_atoms():
    # independent route: 1-D adaptive quadrature of one atom axis profile,
    # tensorized, times the coefficient-weighted cell count
    nodes = np.array([[0.3, 0.7], [0.55, 0.2]])
    g = build_fooling(nodes, B21INF, Variant.G1, m=2)
    total = 0.0
    for atom, coef in g.atoms():
        factors = []
        for ji, ki in zip(atom.j, atom.k):
            val, _ = quad(
                lambda t, ji=ji, ki=ki: math.exp(4.0 - 1.0 / (u * (1.0 - u)))
                if 0.0 < (u := math.ldexp(t, ji) - ki) < 1.0
                else 0.0,
                ki * 2.0**-ji,
                (ki + 1) * 2.0**-ji,
                epsabs=1e-15,
                limit=200,
            )
            factors.append(val)
        total += coef * math.prod(factors)
    assert g.integral == pytest.approx(total, rel=1e-12)


def test_evaluate_matches_atom_sum():
    nodes = np.array([[0.3, 0.7], [0.55, 0.2], [0.9, 0.9]])
    g = build_fooling(nodes, B21INF, Variant.G1, m=3)
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.1, 1.1, size=(300, 2))
    direct = np.zeros(len(x))
    for atom, coef in g.atoms():
        direct += coef * atom.evaluate(x)
    assert g.evaluate(x) == pytest.approx(direct, rel=1e-12, abs=1e-300)


def test_norm_surrogate_positive_and_finite():
    nodes = np.array([[0.3, 0.7]])
    g = build_fooling(nodes, B21INF, Variant.G1, m=4)
    assert 0.0 < g.norm_surrogate < math.inf


# ---------------------------------------------------------------------------


def test_lower_bound_demo_small():
    demo = lower_bound_demo(
        GeneratorSpec(2), B21INF, Variant.G1, [2.0**k for k in range(6, 11)]
    )
    assert all(row.cubature_value == 0.0 for row in demo.rows)
    assert all(row.integral > 0.0 for row in demo.rows)
    assert demo.lower_bound_main == 2.0
    assert demo.lower_bound_log_exponent == 1.0
    assert demo.fit is not None
    # level parameter rises smoothly with the schedule
    assert [row.m for row in demo.rows] == [7, 8, 9, 10, 11]


def test_lower_bound_demo_rejects_shallow_class():
    with pytest.raises(InvalidSpecError):
        lower_bound_demo(
            GeneratorSpec(2),
            SmoothnessClass(1.0, 0.4, 2.0, Scale.B),  # s=1 <= sigma_p=1.5
            Variant.G3,
            [64.0, 128.0],
        )
