"""Certified-optimum TSP solvers at desk scale.

Three methods with overlapping domains so they can cross-check each other:

* brute_force  -- enumerates every distinct cycle, n <= 10 (test oracle)
* held_karp    -- subset dynamic programming, n <= 20 (memory bound)
* branch_bound -- depth-first search with an MST lower bound, n <= 30
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .heuristics import best_insertion
from .tsp import Instance, Tour, canonicalize, distance_matrix, tour_length

BRUTE_FORCE_MAX = 10
HELD_KARP_MAX = 20
BRANCH_BOUND_MAX = 30


@dataclass(frozen=True)
class ExactResult:
    """A certified optimum: its length, one optimal tour, and the method."""

    optimal_length: float
    optimal_tour: Tour
    method: str
    nodes_expanded: int = 0


def brute_force(instance: Instance) -> ExactResult:
    """Enumerate all (n-1)!/2 distinct cycles with node 0 fixed first."""
    n = instance.n
    if n > BRUTE_FORCE_MAX:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_MAX}, got {n}")
    dist = distance_matrix(instance).tolist()
    d0 = dist[0]
    best_length = math.inf
    best_canonical: Tour | None = None
    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:  # each cycle once per orientation
            continue
        length = d0[perm[0]]
        prev = perm[0]
        for node in perm[1:]:
            length += dist[prev][node]
            prev = node
        length += dist[prev][0]
        eps = 1e-9 * max(1.0, best_length if best_length < math.inf else 1.0)
        if length < best_length - eps:
            best_length = length
            best_canonical = canonicalize((0,) + perm)
        elif length <= best_length + eps:
            candidate = canonicalize((0,) + perm)
            if best_canonical is None or candidate < best_canonical:
                best_canonical = candidate
    assert best_canonical is not None
    return ExactResult(
        optimal_length=tour_length(instance, best_canonical),
        optimal_tour=best_canonical,
        method="brute",
    )


def _popcounts(size: int, bits: int) -> np.ndarray:
    masks = np.arange(size, dtype=np.int64)
    counts = np.zeros(size, dtype=np.int8)
    for b in range(bits):
        counts += ((masks >> b) & 1).astype(np.int8)
    return counts


def held_karp(instance: Instance) -> ExactResult:
    """Subset DP over node sets containing node 0, vectorized per layer."""
    n = instance.n
    if n > HELD_KARP_MAX:
        raise ValueError(
            f"held_karp is limited to n <= {HELD_KARP_MAX} (table memory), got {n}; use branch_bound"
        )
    dist = distance_matrix(instance)
    m = n - 1  # nodes 1..n-1 mapped to bits 0..m-1
    size = 1 << m
    sub = dist[1:, 1:]
    dp = np.full((size, m), np.inf)
    parent = np.full((size, m), -1, dtype=np.int8)
    idx = np.arange(m)
    dp[(1 << idx), idx] = dist[0, 1:]

    counts = _popcounts(size, m)
    all_masks = np.arange(size, dtype=np.int64)
    layers = [all_masks[counts == s] for s in range(m + 1)]

    for s in range(2, m + 1):
        masks = layers[s]
        for j in range(m):
            bit_j = 1 << j
            msel = masks[(masks & bit_j) != 0]
            if msel.size == 0:
                continue
            prev_masks = msel ^ bit_j
            best = np.full(msel.size, np.inf)
            arg = np.full(msel.size, -1, dtype=np.int8)
            for k in range(m):
                if k == j:
                    continue
                rows = np.nonzero((prev_masks & (1 << k)) != 0)[0]
                if rows.size == 0:
                    continue
                cand = dp[prev_masks[rows], k] + sub[k, j]
                better = cand < best[rows]
                hit = rows[better]
                best[hit] = cand[better]
                arg[hit] = k
            dp[msel, j] = best
            parent[msel, j] = arg

    full = size - 1
    totals = dp[full, :] + dist[1:, 0]
    j = int(np.argmin(totals))
    best_length = float(totals[j])

    chain = [j]
    mask = full
    while True:
        k = int(parent[mask, chain[-1]])
        if k < 0:
            break
        mask ^= 1 << chain[-1]
        chain.append(k)
    tour = canonicalize((0,) + tuple(node + 1 for node in reversed(chain)))
    return ExactResult(optimal_length=tour_length(instance, tour), optimal_tour=tour, method="held_karp")


def mst_weight(dist: np.ndarray, nodes: Sequence[int]) -> float:
    """Minimum-spanning-tree weight of the given nodes (Prim, O(k^2))."""
    k = len(nodes)
    if k <= 1:
        return 0.0
    sub = dist[np.ix_(nodes, nodes)]
    in_tree = np.zeros(k, dtype=bool)
    in_tree[0] = True
    closest = sub[0].copy()
    total = 0.0
    for _ in range(k - 1):
        candidates = np.where(in_tree, np.inf, closest)
        v = int(np.argmin(candidates))
        total += float(candidates[v])
        in_tree[v] = True
        closest = np.minimum(closest, sub[v])
    return total


def partial_path_bound(instance: Instance, path: Sequence[int]) -> float:
    """Admissible lower bound on any cycle extending ``path`` (starts at 0).

    Path length so far plus the MST weight of the unvisited nodes together
    with both path endpoints. Any completion is a spanning path of that
    node set, so its length is at least the MST weight.
    """
    if not path or path[0] != 0:
        raise ValueError("partial path must start at node 0")
    dist = distance_matrix(instance)
    g = 0.0
    for a, b in zip(path, path[1:]):
        g += float(dist[a, b])
    visited = set(path)
    rest = [v for v in range(instance.n) if v not in visited]
    return g + mst_weight(dist, rest + [0, path[-1]])


def branch_bound(instance: Instance, initial_upper_bound: float | None = None) -> ExactResult:
    """Depth-first branch and bound from node 0 with an MST lower bound.

    The incumbent starts from the best insertion heuristic; a caller-supplied
    upper bound additionally prunes (strictly) without replacing the
    incumbent tour. Dominated states, where the same (visited set, endpoint)
    was already reached at no greater cost, are pruned as well.
    """
    n = instance.n
    if n > BRANCH_BOUND_MAX:
        raise ValueError(f"branch_bound is limited to n <= {BRANCH_BOUND_MAX}, got {n}")
    dist = distance_matrix(instance)
    dist_list = dist.tolist()
    seed_tour = best_insertion(instance)
    best_length = seed_tour.length
    best_tour = seed_tour.tour
    cap = initial_upper_bound if initial_upper_bound is not None else math.inf

    by_near = [sorted(range(n), key=lambda j, i=i: (dist_list[i][j], j)) for i in range(n)]
    best_cost_at: dict[tuple[int, int], float] = {}
    visited = [False] * n
    visited[0] = True
    path = [0]
    expanded = 0

    def mst_rest(last: int) -> float:
        rest = [v for v in range(n) if not visited[v]]
        rest.append(0)
        rest.append(last)
        return mst_weight(dist, rest)

    def dfs(last: int, mask: int, g: float, depth: int) -> None:
        nonlocal best_length, best_tour, expanded
        expanded += 1
        if depth == n:
            total = g + dist_list[last][0]
            if total < best_length:
                best_length = total
                best_tour = tuple(path)
            return
        for nxt in by_near[last]:
            if visited[nxt]:
                continue
            g2 = g + dist_list[last][nxt]
            mask2 = mask | (1 << nxt)
            key = (mask2, nxt)
            prior = best_cost_at.get(key)
            if prior is not None and g2 >= prior:
                continue
            best_cost_at[key] = g2
            visited[nxt] = True
            path.append(nxt)
            bound = g2 + mst_rest(nxt)
            if bound < best_length and bound <= cap:
                dfs(nxt, mask2, g2, depth + 1)
            path.pop()
            visited[nxt] = False

    dfs(0, 1, 0.0, 1)
    tour = canonicalize(best_tour)
    return ExactResult(
        optimal_length=tour_length(instance, tour),
        optimal_tour=tour,
        method="branch_bound",
        nodes_expanded=expanded,
    )


def exact_solve(instance: Instance) -> ExactResult:
    """Certify the optimum with the cheapest applicable method."""
    if instance.n <= HELD_KARP_MAX:
        return held_karp(instance)
    return branch_bound(instance)
