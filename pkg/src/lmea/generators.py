"""Seeded instance generators (uniform and clustered) and TSPLIB-subset files.

Both generators place points on the integer grid {0..100}^2, reject
duplicates, and are pure functions of their seed. Instances round-trip
through a small TSPLIB subset (EUC_2D, NODE_COORD_SECTION) with provenance
carried in COMMENT lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .tsp import Instance

RNG_ALGORITHM = "pcg64"
GENERATOR_VERSION = "1"
GRID_MAX = 100

# Duplicate rejection cannot loop forever on the grid; pathological clu
# parameters (tiny sigma, many nodes per cluster) can, so cap the redraws.
_MAX_REDRAWS = 100_000


class InstanceFormatError(ValueError):
    """An instance file is malformed; the message names the offending line."""


@dataclass(frozen=True)
class GenSpec:
    """Parameters identifying one generated instance."""

    kind: str
    n: int
    seed: int
    num_clusters: int | None = None
    sigma: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("rue", "clu"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.n < 3:
            raise ValueError(f"n must be at least 3, got {self.n}")
        if self.kind == "clu":
            clusters = self.num_clusters if self.num_clusters is not None else default_clusters(self.n)
            sigma = self.sigma if self.sigma is not None else DEFAULT_SIGMA
            if not (1 <= clusters <= self.n):
                raise ValueError(f"num_clusters must be in [1, n], got {clusters}")
            if sigma <= 0:
                raise ValueError(f"sigma must be positive, got {sigma}")


DEFAULT_SIGMA = 1.5

# Cap on the pairwise center distance requirement; shrinks with the cluster
# count so center sets always exist on the grid.
_SEPARATION_CAP = 40.0


def default_clusters(n: int) -> int:
    return max(2, math.ceil(n / 3))


def center_separation(num_clusters: int) -> float:
    """Minimum pairwise distance enforced between cluster centers."""
    return min(_SEPARATION_CAP, 85.0 / math.sqrt(num_clusters))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _check_n(n: int) -> None:
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    if n > (GRID_MAX + 1) ** 2:
        raise ValueError(f"cannot place {n} distinct points on a {GRID_MAX + 1}x{GRID_MAX + 1} grid")


def gen_rue(n: int, seed: int) -> Instance:
    """Instance with n points placed uniformly at random on the grid."""
    _check_n(n)
    rng = _rng(seed)
    points: list[tuple[float, float]] = []
    seen: set[tuple[int, int]] = set()
    while len(points) < n:
        x, y = rng.integers(0, GRID_MAX + 1, size=2)
        p = (int(x), int(y))
        if p in seen:
            continue
        seen.add(p)
        points.append((float(p[0]), float(p[1])))
    return Instance(id=f"rue-{n}-{seed}", kind="rue", n=n, coords=tuple(points), seed=seed)


def gen_clu(n: int, seed: int, num_clusters: int | None = None, sigma: float = DEFAULT_SIGMA) -> Instance:
    """Instance with n points scattered around random cluster centers.

    Centers are uniform on the grid, redrawn until pairwise separated (so
    clusters do not merge into each other at these sizes); node i is assigned
    round-robin to center i mod num_clusters and offset by per-axis Gaussian
    noise, then clamped to [0, 100] and snapped to the grid. Duplicate points
    are redrawn.
    """
    _check_n(n)
    if num_clusters is None:
        num_clusters = default_clusters(n)
    GenSpec(kind="clu", n=n, seed=seed, num_clusters=num_clusters, sigma=sigma)
    min_sep = center_separation(num_clusters)
    rng = _rng(seed)
    centers: list[tuple[int, int]] = []
    tries = 0
    while len(centers) < num_clusters:
        cx, cy = (int(c) for c in rng.integers(0, GRID_MAX + 1, size=2))
        tries += 1
        if tries > _MAX_REDRAWS:
            raise RuntimeError(f"could not place {num_clusters} separated cluster centers")
        if all(math.hypot(cx - ox, cy - oy) >= min_sep for ox, oy in centers):
            centers.append((cx, cy))
    points: list[tuple[float, float]] = []
    seen: set[tuple[int, int]] = set()
    for i in range(n):
        cx, cy = centers[i % num_clusters]
        for _ in range(_MAX_REDRAWS):
            ox, oy = rng.normal(0.0, sigma, size=2)
            x = int(np.rint(min(max(cx + ox, 0.0), float(GRID_MAX))))
            y = int(np.rint(min(max(cy + oy, 0.0), float(GRID_MAX))))
            if (x, y) not in seen:
                break
        else:
            raise RuntimeError(
                f"could not place a distinct point near cluster ({cx}, {cy}); sigma={sigma} too small for n={n}"
            )
        seen.add((x, y))
        points.append((float(x), float(y)))
    return Instance(id=f"clu-{n}-{seed}", kind="clu", n=n, coords=tuple(points), seed=seed)


def generate(spec: GenSpec) -> Instance:
    """Generate the instance described by a GenSpec."""
    if spec.kind == "rue":
        return gen_rue(spec.n, spec.seed)
    clusters = spec.num_clusters if spec.num_clusters is not None else default_clusters(spec.n)
    sigma = spec.sigma if spec.sigma is not None else DEFAULT_SIGMA
    return gen_clu(spec.n, spec.seed, clusters, sigma)


def write_instance(instance: Instance, path: Union[str, Path]) -> None:
    """Write a TSPLIB-subset file. Coordinates must be exact integers."""
    lines = [
        f"NAME : {instance.id}",
        f"COMMENT : kind={instance.kind} seed={instance.seed} rng={RNG_ALGORITHM} generator-version={GENERATOR_VERSION}",
        "TYPE : TSP",
        f"DIMENSION : {instance.n}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        "NODE_COORD_SECTION",
    ]
    for i, (x, y) in enumerate(instance.coords):
        if x != int(x) or y != int(y):
            raise ValueError(f"coordinate ({x}, {y}) is not on the integer grid; cannot serialize")
        lines.append(f"{i + 1} {int(x)} {int(y)}")
    lines.append("EOF")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_instance(path: Union[str, Path]) -> Instance:
    """Load a TSPLIB-subset file written by write_instance.

    Unknown kind/seed metadata defaults to ("rue", 0) so plain EUC_2D files
    inside the coordinate range still load.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    name = None
    dimension = None
    kind = "rue"
    seed = 0
    weight_type = None
    problem_type = None
    coords: list[tuple[float, float]] = []
    seen: set[tuple[int, int]] = set()
    in_coords = False
    next_index = 1
    ended = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if ended:
            raise InstanceFormatError(f"{path.name} line {lineno}: content after EOF")
        if not in_coords:
            if line == "NODE_COORD_SECTION":
                in_coords = True
                continue
            if ":" not in line:
                raise InstanceFormatError(f"{path.name} line {lineno}: expected 'KEY : value' header")
            key, _, value = line.partition(":")
            key = key.strip().upper()
            value = value.strip()
            if key == "NAME":
                name = value
            elif key == "TYPE":
                problem_type = value
            elif key == "DIMENSION":
                try:
                    dimension = int(value)
                except ValueError:
                    raise InstanceFormatError(f"{path.name} line {lineno}: bad DIMENSION {value!r}") from None
            elif key == "EDGE_WEIGHT_TYPE":
                weight_type = value
            elif key == "COMMENT":
                for token in value.split():
                    if token.startswith("kind="):
                        kind = token[len("kind="):]
                    elif token.startswith("seed="):
                        try:
                            seed = int(token[len("seed="):])
                        except ValueError:
                            raise InstanceFormatError(f"{path.name} line {lineno}: bad seed in COMMENT") from None
            continue
        if line == "EOF":
            ended = True
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InstanceFormatError(f"{path.name} line {lineno}: expected 'index x y'")
        try:
            idx, x, y = (int(p) for p in parts)
        except ValueError:
            raise InstanceFormatError(f"{path.name} line {lineno}: coordinates must be integers") from None
        if idx != next_index:
            raise InstanceFormatError(f"{path.name} line {lineno}: expected node index {next_index}, got {idx}")
        next_index += 1
        if not (0 <= x <= GRID_MAX and 0 <= y <= GRID_MAX):
            raise InstanceFormatError(f"{path.name} line {lineno}: coordinate ({x}, {y}) outside [0, {GRID_MAX}]")
        if (x, y) in seen:
            raise InstanceFormatError(f"{path.name} line {lineno}: duplicate point ({x}, {y})")
        seen.add((x, y))
        coords.append((float(x), float(y)))

    if name is None:
        raise InstanceFormatError(f"{path.name}: missing NAME header")
    if problem_type != "TSP":
        raise InstanceFormatError(f"{path.name}: TYPE must be TSP, got {problem_type!r}")
    if weight_type != "EUC_2D":
        raise InstanceFormatError(f"{path.name}: EDGE_WEIGHT_TYPE must be EUC_2D, got {weight_type!r}")
    if dimension is None:
        raise InstanceFormatError(f"{path.name}: missing DIMENSION header")
    if not ended:
        raise InstanceFormatError(f"{path.name}: missing EOF line")
    if len(coords) != dimension:
        raise InstanceFormatError(
            f"{path.name}: DIMENSION says {dimension} nodes but found {len(coords)} coordinate lines"
        )
    if kind not in ("rue", "clu"):
        raise InstanceFormatError(f"{path.name}: unknown kind {kind!r} in COMMENT")
    return Instance(id=name, kind=kind, n=dimension, coords=tuple(coords), seed=seed)
