from __future__ import annotations

from lmea.tsp import Instance


def make_instance(coords, instance_id="test", kind="rue", seed=0) -> Instance:
    pts = tuple((float(x), float(y)) for x, y in coords)
    return Instance(id=instance_id, kind=kind, n=len(pts), coords=pts, seed=seed)


def unit_square() -> Instance:
    return make_instance([(0, 0), (0, 1), (1, 1), (1, 0)], instance_id="square")


def right_triangle() -> Instance:
    # 3-4-5 sides: perimeter 12
    return make_instance([(0, 0), (3, 0), (0, 4)], instance_id="triangle")
