import numpy as np
import pytest

from lmea.generators import (
    GenSpec,
    InstanceFormatError,
    default_clusters,
    gen_clu,
    gen_rue,
    generate,
    read_instance,
    write_instance,
)
from lmea.seeding import derive_seed
from lmea.tsp import distance_matrix


def test_rue_points_in_range():
    inst = gen_rue(10, 12345)
    assert inst.n == 10 and inst.kind == "rue"
    for x, y in inst.coords:
        assert 0 <= x <= 100 and 0 <= y <= 100
        assert x == int(x) and y == int(y)


def test_rue_deterministic():
    assert gen_rue(10, 7) == gen_rue(10, 7)


def test_rue_distinct_across_seeds():
    # 100 seed pairs must give distinct coordinate multisets
    seen = set()
    for pair in range(100):
        for offset in (0, 1):
            inst = gen_rue(10, derive_seed(42, "pair", pair, offset))
            seen.add(tuple(sorted(inst.coords)))
    assert len(seen) == 200


def test_rue_rejects_impossible_n():
    with pytest.raises(ValueError):
        gen_rue(101 * 101 + 1, 0)


def test_clu_points_in_range_and_deterministic():
    inst = gen_clu(15, 99, 3, 5.0)
    assert inst.n == 15 and inst.kind == "clu"
    for x, y in inst.coords:
        assert 0 <= x <= 100 and 0 <= y <= 100
    assert inst == gen_clu(15, 99, 3, 5.0)


def test_clu_no_duplicate_points():
    inst = gen_clu(30, 5, 3, 1.0)
    assert len(set(inst.coords)) == inst.n


def test_clu_clusters_tighter_than_uniform():
    # mean nearest-neighbor distance, averaged over 50 seeds each
    def mean_nn(instance):
        d = distance_matrix(instance).copy()
        np.fill_diagonal(d, np.inf)
        return float(d.min(axis=1).mean())

    clu = np.mean([mean_nn(gen_clu(25, derive_seed(3, "c", i))) for i in range(50)])
    rue = np.mean([mean_nn(gen_rue(25, derive_seed(3, "r", i))) for i in range(50)])
    assert clu < rue


def test_genspec_validation():
    with pytest.raises(ValueError):
        GenSpec(kind="clu", n=10, seed=0, num_clusters=0, sigma=1.0)
    with pytest.raises(ValueError):
        GenSpec(kind="clu", n=10, seed=0, num_clusters=2, sigma=-1.0)
    with pytest.raises(ValueError):
        GenSpec(kind="hex", n=10, seed=0)


def test_generate_dispatch():
    spec = GenSpec(kind="rue", n=12, seed=77)
    assert generate(spec) == gen_rue(12, 77)
    spec = GenSpec(kind="clu", n=12, seed=77)
    assert generate(spec) == gen_clu(12, 77, default_clusters(12))


def test_round_trip_identity(tmp_path):
    inst = gen_rue(10, 7)
    path = tmp_path / "inst.tsp"
    write_instance(inst, path)
    assert read_instance(path) == inst


def test_round_trip_clu_metadata(tmp_path):
    inst = gen_clu(12, 31337)
    path = tmp_path / "c.tsp"
    write_instance(inst, path)
    loaded = read_instance(path)
    assert loaded.kind == "clu" and loaded.seed == 31337 and loaded == inst


def test_write_is_byte_stable(tmp_path):
    a, b = tmp_path / "a.tsp", tmp_path / "b.tsp"
    write_instance(gen_rue(15, 5), a)
    write_instance(gen_rue(15, 5), b)
    assert a.read_bytes() == b.read_bytes()


def _write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _valid_lines():
    return [
        "NAME : t",
        "COMMENT : kind=rue seed=1",
        "TYPE : TSP",
        "DIMENSION : 3",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        "NODE_COORD_SECTION",
        "1 0 0",
        "2 10 0",
        "3 0 10",
        "EOF",
    ]


def test_loader_accepts_minimal_file(tmp_path):
    path = tmp_path / "ok.tsp"
    _write_lines(path, _valid_lines())
    inst = read_instance(path)
    assert inst.n == 3 and inst.coords[1] == (10.0, 0.0)


def test_loader_rejects_count_mismatch(tmp_path):
    lines = _valid_lines()
    lines[3] = "DIMENSION : 4"
    path = tmp_path / "bad.tsp"
    _write_lines(path, lines)
    with pytest.raises(InstanceFormatError, match="4 nodes"):
        read_instance(path)


def test_loader_rejects_out_of_range_coordinate(tmp_path):
    lines = _valid_lines()
    lines[7] = "2 101 0"
    path = tmp_path / "bad.tsp"
    _write_lines(path, lines)
    with pytest.raises(InstanceFormatError, match="line 8"):
        read_instance(path)


def test_loader_rejects_duplicate_point(tmp_path):
    lines = _valid_lines()
    lines[8] = "3 10 0"
    path = tmp_path / "bad.tsp"
    _write_lines(path, lines)
    with pytest.raises(InstanceFormatError, match="duplicate"):
        read_instance(path)


def test_loader_rejects_malformed_coord_line(tmp_path):
    lines = _valid_lines()
    lines[7] = "2 ten 0"
    path = tmp_path / "bad.tsp"
    _write_lines(path, lines)
    with pytest.raises(InstanceFormatError, match="line 8"):
        read_instance(path)


def test_loader_requires_euc2d(tmp_path):
    lines = _valid_lines()
    lines[4] = "EDGE_WEIGHT_TYPE : EXPLICIT"
    path = tmp_path / "bad.tsp"
    _write_lines(path, lines)
    with pytest.raises(InstanceFormatError, match="EUC_2D"):
        read_instance(path)


def test_writer_rejects_fractional_coordinates(tmp_path):
    from conftest import make_instance

    inst = make_instance([(0.5, 0), (3, 0), (0, 4)])
    with pytest.raises(ValueError, match="integer grid"):
        write_instance(inst, tmp_path / "x.tsp")


def test_derive_seed_is_stable():
    assert derive_seed(1, "a", 2) == derive_seed(1, "a", 2)
    assert derive_seed(1, "a", 2) != derive_seed(2, "a", 2)
    assert derive_seed(7, "x") == 15897730785395961261
