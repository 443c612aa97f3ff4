"""Scikit-learn style front end: solvers as estimators over coordinate arrays.

Each estimator takes an (n, 2) array of point coordinates in [0, 100],
solves on fit, and exposes the result through fitted attributes (``tour_``,
``length_``). Hyperparameters follow the sklearn contract (stored verbatim
in __init__, get_params/set_params inherited), so the solvers compose with
pipelines, grid search, and cloning.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .backends import BuiltinGeneticBackend, OffspringBackend
from .engine import EvolveConfig, evolve
from .exact import branch_bound, brute_force, exact_solve, held_karp
from .heuristics import insertion, nearest_neighbor
from .seeding import derive_seed
from .tsp import COORD_MAX, COORD_MIN, Instance


def check_coords(X) -> np.ndarray:
    """Validate a coordinate array: shape (n, 2), n >= 3, finite values in
    [0, 100], no duplicate points. Returns a float64 copy."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) coordinate array, got shape {arr.shape}")
    if arr.shape[0] < 3:
        raise ValueError(f"need at least 3 points, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        raise ValueError("coordinates must be finite")
    if arr.min() < COORD_MIN or arr.max() > COORD_MAX:
        raise ValueError(f"coordinates must lie within [{COORD_MIN:g}, {COORD_MAX:g}]")
    if len({(float(x), float(y)) for x, y in arr}) != arr.shape[0]:
        raise ValueError("duplicate points are not allowed")
    return arr


def instance_from_coords(X, instance_id: str = "points", kind: str = "rue", seed: int = 0) -> Instance:
    """Wrap a raw coordinate array in an Instance."""
    arr = check_coords(X)
    coords = tuple((float(x), float(y)) for x, y in arr)
    return Instance(id=instance_id, kind=kind, n=arr.shape[0], coords=coords, seed=seed)


class _TourMixin:
    """Shared fitted-attribute plumbing for the TSP estimators."""

    def fit_predict(self, X, y=None) -> np.ndarray:
        self.fit(X, y)
        return self.tour_

    def _finish(self, coords: np.ndarray, tour, length: float) -> None:
        self.n_features_in_ = 2
        self.n_points_ = coords.shape[0]
        self.tour_ = np.asarray(tour, dtype=int)
        self.length_ = float(length)


class NearestNeighborTSP(_TourMixin, BaseEstimator):
    """Greedy nearest-neighbor construction from a fixed start node."""

    def __init__(self, start: int = 0):
        self.start = start

    def fit(self, X, y=None):
        coords = check_coords(X)
        instance = instance_from_coords(coords)
        result = nearest_neighbor(instance, self.start)
        self._finish(coords, result.tour, result.length)
        return self


class InsertionTSP(_TourMixin, BaseEstimator):
    """Cheapest-position insertion; variant is FI, NI, or RI."""

    def __init__(self, variant: str = "FI", random_state: int = 0):
        self.variant = variant
        self.random_state = random_state

    def fit(self, X, y=None):
        coords = check_coords(X)
        instance = instance_from_coords(coords)
        result = insertion(instance, self.variant, seed=self.random_state)
        self._finish(coords, result.tour, result.length)
        return self


class ExactTSP(_TourMixin, BaseEstimator):
    """Certified optimum via brute force, Held-Karp, or branch and bound.

    method="auto" routes by size: Held-Karp up to its memory ceiling,
    branch and bound beyond.
    """

    def __init__(self, method: str = "auto"):
        self.method = method

    def fit(self, X, y=None):
        coords = check_coords(X)
        instance = instance_from_coords(coords)
        if self.method == "auto":
            result = exact_solve(instance)
        elif self.method == "brute":
            result = brute_force(instance)
        elif self.method == "held_karp":
            result = held_karp(instance)
        elif self.method == "branch_bound":
            result = branch_bound(instance)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self._finish(coords, result.optimal_tour, result.optimal_length)
        self.method_ = result.method
        self.nodes_expanded_ = result.nodes_expanded
        return self


class EvolutionaryTSP(_TourMixin, BaseEstimator):
    """The evolutionary optimizer behind a fit() call.

    With backend=None a fresh builtin genetic backend is derived from
    ``random_state``; any OffspringBackend instance (remote, scripted) can be
    supplied instead. The full run log is kept on ``run_log_``.
    """

    def __init__(self, population_size: int = 16, generations: int = 250,
                 stagnation_window: int = 20, temperature_increment: float = 0.1,
                 initial_temperature: float = 1.0, max_temperature: float = 2.0,
                 mode: str = "lmea", self_adapt: bool = True,
                 random_state: int = 0, backend: OffspringBackend | None = None):
        self.population_size = population_size
        self.generations = generations
        self.stagnation_window = stagnation_window
        self.temperature_increment = temperature_increment
        self.initial_temperature = initial_temperature
        self.max_temperature = max_temperature
        self.mode = mode
        self.self_adapt = self_adapt
        self.random_state = random_state
        self.backend = backend

    def fit(self, X, y=None):
        coords = check_coords(X)
        instance = instance_from_coords(coords)
        config = EvolveConfig(
            population_size=self.population_size,
            max_generations=self.generations,
            stagnation_window=self.stagnation_window,
            temperature_increment=self.temperature_increment,
            initial_temperature=self.initial_temperature,
            max_temperature=self.max_temperature,
            mode=self.mode,
            self_adapt=self.self_adapt,
            seed=derive_seed(self.random_state, "population"),
        )
        backend = self.backend
        if backend is None:
            backend = BuiltinGeneticBackend(seed=derive_seed(self.random_state, "backend"))
        log = evolve(instance, config, backend)
        self._finish(coords, log.best.tour, log.best.length)
        self.run_log_ = log
        self.n_generations_ = len(log.records)
        return self
