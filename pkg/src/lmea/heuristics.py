"""Classical construction heuristics: nearest neighbor and insertion variants.

All ties break toward the lowest node index (then the earliest insertion
position) so every heuristic is bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .tsp import Instance, ScoredTour, distance_matrix, score

VARIANTS = ("NN", "FI", "NI", "RI")
INSERTION_VARIANTS = ("FI", "NI", "RI")


@dataclass(frozen=True)
class HeuristicSpec:
    """Which heuristic to run and how to start it.

    ``start`` fixes the nearest-neighbor start node; when None, the start is
    drawn from ``seed``. ``seed`` also drives the random-insertion draws.
    """

    variant: str
    start: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown heuristic variant {self.variant!r}")
        if self.start is not None and self.start < 0:
            raise ValueError(f"start node must be nonnegative, got {self.start}")


@dataclass(frozen=True)
class InsertionStep:
    """One insertion decision, recorded for rule-level checks."""

    node: int
    tour_before: tuple[int, ...]
    position: int  # new node inserted after tour_before[position]


def nearest_neighbor(instance: Instance, start: int = 0) -> ScoredTour:
    """Greedy tour: repeatedly append the closest unvisited node."""
    n = instance.n
    if not (0 <= start < n):
        raise ValueError(f"start node {start} out of range for n={n}")
    dist = distance_matrix(instance)
    visited = [False] * n
    visited[start] = True
    tour = [start]
    current = start
    for _ in range(n - 1):
        best = -1
        best_d = math.inf
        row = dist[current]
        for j in range(n):
            if not visited[j] and row[j] < best_d:
                best = j
                best_d = row[j]
        visited[best] = True
        tour.append(best)
        current = best
    return score(instance, tour)


def insertion_cost(instance: Instance, i: int, j: int, k: int) -> float:
    """Cost of inserting node k between adjacent tour nodes i and j."""
    n = instance.n
    if len({i, j, k}) != 3:
        raise ValueError(f"nodes must be distinct, got ({i}, {j}, {k})")
    for node in (i, j, k):
        if not (0 <= node < n):
            raise ValueError(f"node index {node} out of range for n={n}")
    dist = distance_matrix(instance)
    return float(dist[i, k] + dist[k, j] - dist[i, j])


def _extreme_pair(dist: np.ndarray, n: int, farthest: bool) -> tuple[int, int]:
    best = (-1, -1)
    best_d = -math.inf if farthest else math.inf
    for i in range(n):
        for j in range(i + 1, n):
            d = dist[i, j]
            if (farthest and d > best_d) or (not farthest and d < best_d):
                best = (i, j)
                best_d = d
    return best


def _insertion_steps(instance: Instance, variant: str, seed: int) -> Iterator[InsertionStep]:
    """Drive the insertion construction, yielding each decision."""
    n = instance.n
    dist = distance_matrix(instance)
    rng = np.random.Generator(np.random.PCG64(seed))

    if variant == "FI":
        a, b = _extreme_pair(dist, n, farthest=True)
    elif variant == "NI":
        a, b = _extreme_pair(dist, n, farthest=False)
    else:
        a, b = sorted(int(v) for v in rng.choice(n, size=2, replace=False))

    tour = [a, b]
    in_tour = [False] * n
    in_tour[a] = in_tour[b] = True
    # Minimum distance from each node to the current tour, kept incrementally.
    to_tour = np.minimum(dist[:, a], dist[:, b])

    while len(tour) < n:
        remaining = [v for v in range(n) if not in_tour[v]]
        if variant == "FI":
            node = max(remaining, key=lambda v: (to_tour[v], -v))
        elif variant == "NI":
            node = min(remaining, key=lambda v: (to_tour[v], v))
        else:
            node = remaining[int(rng.integers(len(remaining)))]

        best_pos = 0
        best_cost = math.inf
        for pos in range(len(tour)):
            i = tour[pos]
            j = tour[(pos + 1) % len(tour)]
            cost = dist[i, node] + dist[node, j] - dist[i, j]
            if cost < best_cost:
                best_cost = cost
                best_pos = pos
        yield InsertionStep(node=node, tour_before=tuple(tour), position=best_pos)
        tour.insert(best_pos + 1, node)
        in_tour[node] = True
        to_tour = np.minimum(to_tour, dist[:, node])

    yield InsertionStep(node=-1, tour_before=tuple(tour), position=-1)


def insertion(instance: Instance, variant: str, seed: int = 0) -> ScoredTour:
    """Build a tour by repeated cheapest-position insertion.

    The next node follows the variant rule: FI takes the node farthest from
    the tour, NI the nearest, RI a uniformly random one. The initial pair is
    the mutually farthest (FI), mutually nearest (NI), or a random (RI) pair.
    """
    if variant not in INSERTION_VARIANTS:
        raise ValueError(f"unknown insertion variant {variant!r}")
    final = None
    for step in _insertion_steps(instance, variant, seed):
        final = step
    assert final is not None
    return score(instance, final.tour_before)


def best_insertion(instance: Instance) -> ScoredTour:
    """Best tour among the three insertion variants (RI with seed 0)."""
    candidates = [insertion(instance, v, seed=0) for v in INSERTION_VARIANTS]
    return min(candidates, key=lambda s: (s.length, s.tour))


def run_heuristic(instance: Instance, spec: HeuristicSpec) -> ScoredTour:
    """Run the heuristic described by ``spec`` on ``instance``."""
    if spec.variant == "NN":
        if spec.start is not None:
            start = spec.start
        else:
            rng = np.random.Generator(np.random.PCG64(spec.seed))
            start = int(rng.integers(instance.n))
        return nearest_neighbor(instance, start)
    return insertion(instance, spec.variant, seed=spec.seed)
