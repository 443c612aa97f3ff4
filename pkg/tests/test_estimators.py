import numpy as np
import pytest
from sklearn.base import clone

from lmea.estimators import (
    EvolutionaryTSP,
    ExactTSP,
    InsertionTSP,
    NearestNeighborTSP,
    check_coords,
    instance_from_coords,
)
from lmea.exact import held_karp
from lmea.generators import gen_rue
from lmea.heuristics import insertion, nearest_neighbor
from lmea.tsp import validate_tour

SQUARE = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])


def _coords(instance):
    return np.asarray(instance.coords)


def test_check_coords_happy_path():
    out = check_coords([[0, 0], [1, 2], [3, 4]])
    assert out.shape == (3, 2)
    assert out.dtype == np.float64


@pytest.mark.parametrize(
    "bad",
    [
        [[0, 0], [1, 1]],                      # too few points
        [[0, 0, 0], [1, 1, 1], [2, 2, 2]],     # wrong width
        [[0, 0], [1, 1], [101, 0]],            # out of range
        [[0, 0], [1, 1], [1, 1]],              # duplicates
        [[0, 0], [1, 1], [np.nan, 2]],         # non-finite
    ],
)
def test_check_coords_rejects(bad):
    with pytest.raises(ValueError):
        check_coords(bad)


def test_instance_from_coords_round_trip():
    inst = instance_from_coords(SQUARE, instance_id="sq")
    assert inst.n == 4 and inst.id == "sq"


def test_nearest_neighbor_estimator_matches_function():
    inst = gen_rue(10, 3)
    est = NearestNeighborTSP(start=2).fit(_coords(inst))
    reference = nearest_neighbor(inst, 2)
    assert tuple(est.tour_) == reference.tour
    assert est.length_ == reference.length
    assert est.n_points_ == 10


def test_insertion_estimator_matches_function():
    inst = gen_rue(12, 8)
    est = InsertionTSP(variant="NI").fit(_coords(inst))
    assert est.length_ == insertion(inst, "NI").length


def test_exact_estimator_square():
    est = ExactTSP().fit(SQUARE)
    assert est.length_ == pytest.approx(4.0, abs=1e-12)
    assert est.method_ == "held_karp"


def test_exact_estimator_methods_agree():
    coords = _coords(gen_rue(9, 14))
    auto = ExactTSP(method="auto").fit(coords)
    brute = ExactTSP(method="brute").fit(coords)
    assert auto.length_ == pytest.approx(brute.length_, rel=1e-9)


def test_exact_estimator_rejects_unknown_method():
    with pytest.raises(ValueError):
        ExactTSP(method="magic").fit(SQUARE)


def test_evolutionary_estimator_small_run():
    inst = gen_rue(10, 77)
    est = EvolutionaryTSP(generations=60, random_state=5).fit(_coords(inst))
    assert validate_tour(10, tuple(est.tour_)) == tuple(est.tour_)
    assert est.n_generations_ == 60
    assert est.run_log_.completed
    assert est.length_ >= held_karp(inst).optimal_length * (1 - 1e-9)


def test_evolutionary_estimator_deterministic_in_random_state():
    coords = _coords(gen_rue(9, 6))
    a = EvolutionaryTSP(generations=30, random_state=3).fit(coords)
    b = EvolutionaryTSP(generations=30, random_state=3).fit(coords)
    assert tuple(a.tour_) == tuple(b.tour_)
    assert a.length_ == b.length_


def test_fit_predict_returns_tour():
    tour = NearestNeighborTSP().fit_predict(SQUARE)
    assert sorted(tour.tolist()) == [0, 1, 2, 3]


def test_get_params_round_trip_and_clone():
    est = EvolutionaryTSP(population_size=8, generations=40, mode="opro", random_state=1)
    params = est.get_params()
    assert params["population_size"] == 8
    assert params["mode"] == "opro"
    cloned = clone(est)
    assert cloned.get_params() == params
    est.set_params(generations=10)
    assert est.generations == 10
