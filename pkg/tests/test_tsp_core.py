import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_instance, right_triangle, unit_square
from lmea.tsp import (
    ConsistencyError,
    InvalidTourError,
    TourViolation,
    canonicalize,
    distance,
    optimality_gap,
    score,
    tour_length,
    validate_tour,
)


def test_distance_axis_aligned():
    inst = make_instance([(0, 0), (3, 0), (50, 50)])
    assert distance(inst, 0, 1) == 3.0


def test_distance_identity_is_zero():
    inst = make_instance([(0, 0), (3, 0), (50, 50)])
    assert distance(inst, 0, 0) == 0.0


def test_distance_345():
    inst = make_instance([(0, 0), (3, 4), (50, 50)])
    assert distance(inst, 0, 1) == 5.0


def test_distance_symmetric():
    inst = make_instance([(2, 7), (93, 14), (40, 80)])
    for i in range(3):
        for j in range(3):
            assert distance(inst, i, j) == distance(inst, j, i)


def test_distance_rejects_bad_index():
    inst = right_triangle()
    with pytest.raises(ValueError, match="out of range"):
        distance(inst, 0, 3)


def test_tour_length_triangle():
    assert tour_length(right_triangle(), [0, 1, 2]) == pytest.approx(12.0, abs=1e-12)


def test_tour_length_unit_square():
    assert tour_length(unit_square(), [0, 1, 2, 3]) == pytest.approx(4.0, abs=1e-12)


def test_tour_length_crossing_square():
    expected = 2.0 + 2.0 * math.sqrt(2.0)
    assert tour_length(unit_square(), [0, 2, 1, 3]) == pytest.approx(expected, rel=1e-12)


def test_tour_length_rejects_invalid():
    with pytest.raises(InvalidTourError):
        tour_length(unit_square(), [0, 1, 2])


@pytest.mark.parametrize(
    "order,code",
    [
        ([0, 1, 1, 3], "duplicate-index"),
        ([0, 1, 2], "wrong-length"),
        ([0, 1, 2, 7], "out-of-range"),
    ],
)
def test_validate_tour_violations(order, code):
    result = validate_tour(4, order)
    assert isinstance(result, TourViolation)
    assert result.code == code


def test_validate_tour_accepts_permutation():
    assert validate_tour(4, [0, 1, 2, 3]) == (0, 1, 2, 3)


def test_validate_tour_rejects_non_integers():
    result = validate_tour(3, [0, 1.5, 2])
    assert isinstance(result, TourViolation)
    assert result.code == "not-an-index"


@given(st.permutations(list(range(8))), st.integers(0, 7), st.booleans())
@settings(max_examples=80, deadline=None)
def test_tour_length_cycle_symmetry(perm, rotation, flip):
    inst = make_instance([(3 * i % 17, (5 * i * i + 1) % 23) for i in range(8)])
    variant = perm[rotation:] + perm[:rotation]
    if flip:
        variant = list(reversed(variant))
    assert tour_length(inst, variant) == pytest.approx(tour_length(inst, perm), rel=1e-12)


def test_gap_zero_when_equal():
    assert optimality_gap(12.0, 12.0) == 0.0


def test_gap_ten_percent():
    assert abs(optimality_gap(13.2, 12.0) - 0.10) < 1e-12


def test_gap_monotone_in_found_length():
    gaps = [optimality_gap(100.0 + k, 100.0) for k in range(6)]
    assert gaps == sorted(gaps)
    assert all(g >= 0 for g in gaps)


def test_gap_rejects_nonpositive_optimum():
    with pytest.raises(ValueError):
        optimality_gap(10.0, 0.0)


def test_gap_flags_found_below_optimum():
    with pytest.raises(ConsistencyError):
        optimality_gap(9.0, 10.0)


def test_gap_tolerates_ulp_noise():
    opt = 268.34275704935294
    assert optimality_gap(opt * (1 - 1e-12), opt) == 0.0


def test_canonicalize_rotation():
    assert canonicalize([2, 3, 0, 1]) == (0, 1, 2, 3)


def test_canonicalize_reflection():
    assert canonicalize([0, 3, 2, 1]) == (0, 1, 2, 3)


def test_canonicalize_fixpoint():
    assert canonicalize([0, 1, 2, 3]) == (0, 1, 2, 3)


@given(st.permutations(list(range(7))), st.integers(0, 6), st.booleans())
@settings(max_examples=80, deadline=None)
def test_canonicalize_identifies_cycles(perm, rotation, flip):
    variant = perm[rotation:] + perm[:rotation]
    if flip:
        variant = list(reversed(variant))
    assert canonicalize(variant) == canonicalize(perm)
    # idempotent and length preserving
    canon = canonicalize(variant)
    assert canonicalize(canon) == canon
    inst = make_instance([(11 * i % 29, (7 * i + 3) % 31) for i in range(7)])
    assert tour_length(inst, canon) == pytest.approx(tour_length(inst, perm), rel=1e-12)


def test_scored_tour_matches_recomputation():
    inst = right_triangle()
    scored = score(inst, [2, 0, 1])
    assert scored.length == tour_length(inst, scored.tour)


def test_instance_rejects_out_of_range_coordinate():
    with pytest.raises(ValueError, match="outside"):
        make_instance([(0, 0), (3, 0), (101, 5)])


def test_instance_rejects_duplicate_points():
    with pytest.raises(ValueError, match="duplicate"):
        make_instance([(0, 0), (3, 0), (3, 0)])


def test_instance_rejects_too_few_nodes():
    with pytest.raises(ValueError):
        make_instance([(0, 0), (1, 1)])
