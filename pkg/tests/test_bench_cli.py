import json
import subprocess
import sys
from pathlib import Path

import pytest

from lmea.bench.cli import main
from lmea.bench.manifest import generate_benchmark, load_manifest, manifest_instances
from lmea.bench.report import merge_fragments, render_csv, render_text, write_report
from lmea.bench.runner import run_baselines, run_evolve, solve_all
from lmea.exact import brute_force
from lmea.generators import read_instance
from lmea.tsp import tour_length, validate_tour


def _tiny_bench(tmp_path, name="bench", sizes=(10,), per_set=2, seed=99):
    out = tmp_path / name
    generate_benchmark(out, sizes=sizes, per_set=per_set, master_seed=seed)
    return out


def test_gen_default_layout_counts(tmp_path):
    out = tmp_path / "full"
    manifest = generate_benchmark(out)
    files = sorted((out / "instances").glob("*.tsp"))
    assert len(files) == 40
    assert len(manifest["sets"]) == 8
    names = {s["name"] for s in manifest["sets"]}
    assert names == {f"{k}-{n}" for k in ("rue", "clu") for n in (10, 15, 20, 25)}


def test_gen_single_size_counts(tmp_path):
    out = tmp_path / "small"
    manifest = generate_benchmark(out, sizes=(10,))
    assert len(manifest["sets"]) == 2
    assert len(list((out / "instances").glob("*.tsp"))) == 10


def test_gen_rerun_is_byte_identical(tmp_path):
    out_a = _tiny_bench(tmp_path, "a", sizes=(10, 15), per_set=3)
    out_b = _tiny_bench(tmp_path, "b", sizes=(10, 15), per_set=3)
    files_a = sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(out_b) for p in out_b.rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes()


def test_manifest_instances_load(tmp_path):
    out = _tiny_bench(tmp_path)
    manifest = load_manifest(out)
    for set_entry, inst_entry in manifest_instances(manifest):
        instance = read_instance(out / inst_entry["path"])
        assert instance.id == inst_entry["id"]
        assert instance.kind == set_entry["kind"]
        assert instance.n == set_entry["n"]


def test_solve_caches_and_validates(tmp_path):
    out = _tiny_bench(tmp_path)
    optima, solved_first = solve_all(out)
    assert solved_first == 4
    for inst_entry in [e for _, e in manifest_instances(load_manifest(out))]:
        record = optima["instances"][inst_entry["id"]]
        instance = read_instance(out / inst_entry["path"])
        tour = tuple(record["tour"])
        assert validate_tour(instance.n, tour) == tour
        assert tour_length(instance, tour) == pytest.approx(record["length"], rel=1e-9)
    _, solved_again = solve_all(out)
    assert solved_again == 0


def test_solve_matches_brute_force_oracle(tmp_path):
    out = _tiny_bench(tmp_path)
    optima, _ = solve_all(out)
    for _, inst_entry in manifest_instances(load_manifest(out)):
        instance = read_instance(out / inst_entry["path"])
        assert optima["instances"][inst_entry["id"]]["length"] == pytest.approx(
            brute_force(instance).optimal_length, rel=1e-9
        )


def test_baselines_fragment_shape(tmp_path):
    out = _tiny_bench(tmp_path)
    fragment = run_baselines(out, repetitions=3)
    assert set(fragment["algorithms"]) == {"NN", "FI", "NI", "RI"}
    for algo, payload in fragment["algorithms"].items():
        for set_name, stats in payload["sets"].items():
            assert stats["mean_gap"] >= 0.0
            assert len(stats["per_instance_gap"]) == 2
    again = run_baselines(out, repetitions=3)
    assert again == fragment


def test_evolve_lmea_star_keeps_temperature(tmp_path):
    out = _tiny_bench(tmp_path, sizes=(10,), per_set=1)
    run_evolve(out, mode="lmea_star", config_overrides={"max_generations": 12})
    log_path = next((out / "runlogs").glob("*-lmea_star.jsonl"))
    lines = [json.loads(l) for l in log_path.read_text().splitlines()]
    temps = {l["temperature"] for l in lines if l["record"] == "generation"}
    assert temps == {1.0}
    assert lines[0]["config"]["self_adapt"] is False


def test_evolve_writes_convergence_series(tmp_path):
    out = _tiny_bench(tmp_path, sizes=(10,), per_set=1)
    run_evolve(out, mode="lmea", config_overrides={"max_generations": 8})
    csv_path = next((out / "convergence").glob("*-lmea.csv"))
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "generation,best_gap_pct,mean_gap_pct"
    assert len(lines) == 9
    first = lines[1].split(",")
    assert int(first[0]) == 1
    assert float(first[1]) <= float(first[2])


def test_evolve_rejects_unknown_mode(tmp_path):
    out = _tiny_bench(tmp_path)
    with pytest.raises(ValueError):
        run_evolve(out, mode="alien")


def test_workers_do_not_change_results(tmp_path):
    out_a = _tiny_bench(tmp_path, "w1", sizes=(10,), per_set=3)
    out_b = _tiny_bench(tmp_path, "w2", sizes=(10,), per_set=3)
    solve_all(out_a, workers=1)
    solve_all(out_b, workers=3)
    assert (out_a / "optima.json").read_bytes() == (out_b / "optima.json").read_bytes()
    frag_a = run_baselines(out_a, repetitions=2, workers=1)
    frag_b = run_baselines(out_b, repetitions=2, workers=3)
    assert frag_a == frag_b


def test_report_merge_is_order_independent(tmp_path):
    frag_a = {"algorithms": {"NN": {"sets": {"rue-10": {"mean_gap": 0.1, "std_gap": 0.0, "per_instance_gap": [0.1]}}}}}
    frag_b = {"algorithms": {"lmea": {"sets": {"rue-10": {
        "mean_gap": 0.0, "std_gap": 0.0, "per_instance_gap": [0.0],
        "successes": 1, "gens_mean": 12.0, "gens_std": 0.0, "generations": [12]}}}}}
    ab = merge_fragments([frag_a, frag_b])
    ba = merge_fragments([frag_b, frag_a])
    assert render_text(ab) == render_text(ba)
    assert render_csv(ab) == render_csv(ba)


def test_report_marks_failures_as_na():
    frag = {"algorithms": {"opro": {"sets": {"rue-20": {
        "mean_gap": 0.263, "std_gap": 0.0358, "per_instance_gap": [0.263],
        "successes": 0, "gens_mean": None, "gens_std": None, "generations": [None]}}}}}
    text = render_text(merge_fragments([frag]))
    assert "N/A (0)" in text
    assert "26.30 +/- 3.58" in text  # two-decimal percent formatting


def test_report_end_to_end(tmp_path):
    out = _tiny_bench(tmp_path, sizes=(10,), per_set=2)
    run_baselines(out, repetitions=2)
    run_evolve(out, mode="lmea", config_overrides={"max_generations": 10})
    merged = write_report(out)
    assert (out / "report.txt").exists() and (out / "report.csv").exists()
    text = (out / "report.txt").read_text()
    assert "rue-10" in text and "clu-10" in text
    csv_lines = (out / "report.csv").read_text().splitlines()
    assert csv_lines[0].startswith("set,algorithm,")
    assert len(csv_lines) == 1 + 2 * 5  # 2 sets x (4 baselines + lmea)
    assert set(merged["algorithms"]) == {"NN", "FI", "NI", "RI", "lmea"}


def test_cli_main_pipeline(tmp_path):
    out = str(tmp_path / "cli")
    assert main(["gen", "--out", out, "--sizes", "10", "--per-set", "1", "--seed", "5"]) == 0
    assert main(["solve", "--out", out]) == 0
    assert main(["baselines", "--out", out, "--repetitions", "2"]) == 0
    assert main(["evolve", "--out", out, "--mode", "lmea", "--generations", "6"]) == 0
    assert main(["report", "--out", out]) == 0
    assert (Path(out) / "report.txt").exists()


def test_cli_config_file_and_flag_overrides(tmp_path):
    out = tmp_path / "cfg"
    generate_benchmark(out, sizes=(10,), per_set=1, master_seed=3)
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "evolve": {"max_generations": 4, "population_size": 6},
        "backend": {"kind": "builtin", "mutation": "swap"},
    }))
    assert main(["evolve", "--out", str(out), "--config", str(config_path),
                 "--generations", "7"]) == 0
    fragment = json.loads((out / "evolve-lmea.json").read_text())
    assert fragment["config"]["max_generations"] == 7  # flag wins over file
    assert fragment["config"]["population_size"] == 6
    assert fragment["backend"]["mutation"] == "swap"


def test_cli_entrypoint_subprocess(tmp_path):
    out = tmp_path / "sub"
    result = subprocess.run(
        [sys.executable, "-m", "lmea", "gen", "--out", str(out), "--sizes", "10", "--per-set", "1"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "wrote 2 instances" in result.stdout
