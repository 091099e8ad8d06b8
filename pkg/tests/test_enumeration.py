import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frolov import (
    BudgetExceededError,
    GeneratorSpec,
    Kind,
    brute_force_points,
    enumerate_points,
    make_lattice,
    point_count_profile,
)
from frolov.enumeration import iter_point_blocks


def test_d1_n5_exact_points():
    points = enumerate_points(make_lattice(GeneratorSpec(1), 5.0))
    assert points.count == 5
    assert np.array_equal(points.integer_preimages.ravel(), np.arange(5))
    assert points.points.ravel() == pytest.approx([0.0, 0.2, 0.4, 0.6, 0.8], abs=1e-15)


@pytest.mark.parametrize(
    "d,kind,n",
    [
        (2, Kind.STANDARD, 553.7),
        (2, Kind.STANDARD, 2.0**10),
        (2, Kind.CHEBYSHEV, 2.0**10),
        (3, Kind.STANDARD, 257.3),
        (3, Kind.STANDARD, 2.0**11),
    ],
)
def test_tightened_enumeration_matches_brute_force(d, kind, n):
    lattice = make_lattice(GeneratorSpec(d, kind), n)
    fast = enumerate_points(lattice)
    slow = brute_force_points(lattice)
    assert np.array_equal(fast.integer_preimages, slow.integer_preimages)
    assert np.array_equal(fast.points, slow.points)


def test_membership_policy_is_consistent():
    lattice = make_lattice(GeneratorSpec(2), 300.0)
    points = enumerate_points(lattice)
    # every returned point passes the half-open test on its own coordinates
    assert np.all(points.points >= 0.0) and np.all(points.points < 1.0)
    # every bounding-box candidate that was not returned fails it
    inv = np.linalg.inv(lattice.t_n)
    lo = np.floor(np.minimum(inv, 0.0).sum(axis=1)).astype(np.int64) - 1
    hi = np.ceil(np.maximum(inv, 0.0).sum(axis=1)).astype(np.int64) + 1
    grid = np.stack(
        [g.ravel() for g in np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)])], axis=1
    )
    accepted = set(map(tuple, points.integer_preimages))
    rejected = np.array([row for row in grid if tuple(row) not in accepted])
    images = rejected @ lattice.t_n.T
    assert not np.any(np.all((images >= 0.0) & (images < 1.0), axis=1))


def test_enumeration_is_deterministic_and_sorted():
    lattice = make_lattice(GeneratorSpec(2), 2.0**10)
    a = enumerate_points(lattice)
    b = enumerate_points(lattice)
    assert np.array_equal(a.integer_preimages, b.integer_preimages)
    order = np.lexsort(a.integer_preimages.T[::-1])
    assert np.array_equal(order, np.arange(a.count))


def test_threaded_enumeration_matches_sequential():
    lattice = make_lattice(GeneratorSpec(2), 2.0**12)
    seq = enumerate_points(lattice, threads=1)
    par = enumerate_points(lattice, threads=3)
    assert np.array_equal(seq.integer_preimages, par.integer_preimages)


def test_stream_blocks_match_materialized():
    lattice = make_lattice(GeneratorSpec(2), 2.0**10)
    whole = enumerate_points(lattice)
    blocks = list(iter_point_blocks(lattice))
    stacked = np.concatenate([k for k, _ in blocks])
    assert np.array_equal(stacked, whole.integer_preimages)


def test_count_fixtures_d2():
    # regression fixtures; the windowed assertion is the contract
    assert enumerate_points(make_lattice(GeneratorSpec(2), 64.0)).count == 66
    assert enumerate_points(make_lattice(GeneratorSpec(2), 2.0**8)).count == 259
    count = enumerate_points(make_lattice(GeneratorSpec(2), 64.0)).count
    assert 64 - 6 * math.log2(64) <= count <= 64 + 6 * math.log2(64)


def test_point_count_profile_d1_is_exact():
    profile = point_count_profile(GeneratorSpec(1), [5.0, 10.0, 20.0])
    assert [row[2] for row in profile] == [0.0, 0.0, 0.0]
    assert point_count_profile(GeneratorSpec(1), []) == []


def test_budget_error_names_offender():
    lattice = make_lattice(GeneratorSpec(2), 2.0**16)
    with pytest.raises(BudgetExceededError, match=r"n=65536.*d=2"):
        enumerate_points(lattice, budget=1000)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.0, max_value=5000.0))
def test_d1_count_property(n):
    points = enumerate_points(make_lattice(GeneratorSpec(1), n))
    assert points.count in (math.floor(n), math.ceil(n))
    assert np.all(points.points >= 0.0) and np.all(points.points < 1.0)
