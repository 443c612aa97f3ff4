"""Euclidean TSP primitives: instances, tours, lengths, and the gap metric."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

# A tour is a permutation of {0, ..., n-1}; node 0-based everywhere in memory.
Tour = tuple[int, ...]

# Relative tolerance for all length equality/ordering comparisons.
REL_EPS = 1e-9

KINDS = ("rue", "clu")

COORD_MIN = 0.0
COORD_MAX = 100.0


class InvalidTourError(ValueError):
    """An index sequence is not a permutation of the instance's nodes."""


class ConsistencyError(RuntimeError):
    """A reported tour length contradicts a certified optimal length."""


@dataclass(frozen=True)
class Instance:
    """A Euclidean TSP instance with points on the [0, 100] plane.

    ``kind`` tags the family the instance was drawn from ("rue" for uniform
    placement, "clu" for clustered placement) and ``seed`` records the
    generator seed for provenance.
    """

    id: str
    kind: str
    n: int
    coords: tuple[tuple[float, float], ...]
    seed: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown instance kind {self.kind!r}, expected one of {KINDS}")
        if self.n < 3:
            raise ValueError(f"instance needs at least 3 nodes, got {self.n}")
        if len(self.coords) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(self.coords)}")
        for x, y in self.coords:
            if not (COORD_MIN <= x <= COORD_MAX and COORD_MIN <= y <= COORD_MAX):
                raise ValueError(f"coordinate ({x}, {y}) outside [{COORD_MIN:g}, {COORD_MAX:g}]")
        if len(set(self.coords)) != self.n:
            raise ValueError("instance contains duplicate points")


@dataclass(frozen=True)
class ScoredTour:
    """A tour paired with its cycle length on the owning instance."""

    tour: Tour
    length: float


@dataclass(frozen=True)
class TourViolation:
    """Names the first reason an index sequence fails to be a valid tour."""

    code: str  # wrong-length | out-of-range | duplicate-index | not-an-index
    detail: str

    def __str__(self) -> str:
        return self.detail


def distance(instance: Instance, i: int, j: int) -> float:
    """Euclidean distance between nodes i and j."""
    n = instance.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"node index out of range: ({i}, {j}) for n={n}")
    xi, yi = instance.coords[i]
    xj, yj = instance.coords[j]
    return math.hypot(xi - xj, yi - yj)


@lru_cache(maxsize=256)
def distance_matrix(instance: Instance) -> np.ndarray:
    """Full pairwise distance matrix, cached per instance. Read-only."""
    pts = np.asarray(instance.coords, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    mat = np.sqrt((diff * diff).sum(axis=2))
    mat.setflags(write=False)
    return mat


def validate_tour(n: int, order: Iterable[int]) -> Union[Tour, TourViolation]:
    """Check that ``order`` is a permutation of {0..n-1}.

    Returns the tour as a tuple when valid, otherwise a TourViolation naming
    the first problem found. Violations are data, not exceptions.
    """
    items = list(order)
    if len(items) != n:
        return TourViolation("wrong-length", f"wrong length: got {len(items)}, expected {n}")
    seen = [False] * n
    for pos, value in enumerate(items):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            return TourViolation("not-an-index", f"not an index: {value!r} at position {pos}")
        v = int(value)
        if v < 0 or v >= n:
            return TourViolation("out-of-range", f"index out of range: {v} at position {pos}")
        if seen[v]:
            return TourViolation("duplicate-index", f"duplicate index: {v} at position {pos}")
        seen[v] = True
    return tuple(int(v) for v in items)


def tour_length(instance: Instance, tour: Sequence[int]) -> float:
    """Cycle length of ``tour``: consecutive edges plus the closing edge."""
    checked = validate_tour(instance.n, tour)
    if isinstance(checked, TourViolation):
        raise InvalidTourError(str(checked))
    coords = instance.coords
    total = 0.0
    prev = checked[-1]
    for node in checked:
        xa, ya = coords[prev]
        xb, yb = coords[node]
        total += math.hypot(xa - xb, ya - yb)
        prev = node
    return total


def score(instance: Instance, tour: Sequence[int]) -> ScoredTour:
    """Validate ``tour`` and pair it with its length."""
    checked = validate_tour(instance.n, tour)
    if isinstance(checked, TourViolation):
        raise InvalidTourError(str(checked))
    return ScoredTour(tour=checked, length=tour_length(instance, checked))


def lengths_equal(a: float, b: float) -> bool:
    """Equality of lengths under the package-wide relative tolerance."""
    return abs(a - b) <= REL_EPS * max(abs(a), abs(b), 1.0)


def optimality_gap(found_length: float, optimal_length: float) -> float:
    """Relative excess (found - opt) / opt, as a fraction.

    A found length below the optimum by more than the tolerance signals a
    broken optimum (or a mismatched instance) and raises ConsistencyError.
    """
    if optimal_length <= 0:
        raise ValueError(f"optimal length must be positive, got {optimal_length}")
    if found_length < optimal_length and not lengths_equal(found_length, optimal_length):
        raise ConsistencyError(
            f"found length {found_length} is below the optimum {optimal_length}"
        )
    if lengths_equal(found_length, optimal_length):
        return 0.0
    return (found_length - optimal_length) / optimal_length


def canonicalize(tour: Sequence[int]) -> Tour:
    """Rotation/reflection-normalized form of a cyclic tour.

    Node 0 is rotated to the front, then the direction is flipped if needed
    so the second element is the smaller neighbor of node 0. Two tours
    describe the same cycle iff their canonical forms are identical.
    """
    checked = validate_tour(len(tuple(tour)), tour)
    if isinstance(checked, TourViolation):
        raise InvalidTourError(str(checked))
    start = checked.index(0)
    rotated = checked[start:] + checked[:start]
    if len(rotated) > 2 and rotated[-1] < rotated[1]:
        rotated = (0,) + tuple(reversed(rotated[1:]))
    return rotated
