"""Executes the benchmark protocol: certify optima, run baselines, run the
evolutionary modes, and write fragments/logs/convergence series.

Concurrency model: a bounded worker pool over per-instance tasks. Every task
derives its own RNG seeds by hashing the task key with the master seed, so
results are identical at any worker count. Results are merged in manifest
order, never completion order.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from ..backends import BuiltinGeneticBackend, RemoteChatBackend, RemoteConfig, ScriptedBackend
from ..engine import EvolveConfig, evolve, run_log_lines
from ..exact import branch_bound, held_karp
from ..generators import read_instance
from ..heuristics import HeuristicSpec, run_heuristic
from ..seeding import derive_seed
from ..tsp import optimality_gap
from .manifest import load_manifest, manifest_instances

OPTIMA_NAME = "optima.json"
BASELINE_ALGOS = ("NN", "FI", "NI", "RI")
MODES = ("lmea", "opro", "lmea_star")


def _read_optima(out: Path) -> dict:
    path = out / OPTIMA_NAME
    if path.exists():
        return json.loads(path.read_text(encoding="utf-8"))
    return {"instances": {}}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _solve_task(args: tuple[str, str]) -> tuple[str, dict]:
    instance_path, instance_id = args
    instance = read_instance(instance_path)
    if instance.n <= 20:
        result = held_karp(instance)
    else:
        result = branch_bound(instance)
    return instance_id, {
        "length": float(result.optimal_length),
        "tour": [int(v) for v in result.optimal_tour],
        "method": result.method,
    }


def solve_all(out_dir: Union[str, Path], workers: int = 1) -> tuple[dict, int]:
    """Certify every instance's optimum; cached results are never re-solved.

    Returns (optima payload, number of freshly solved instances).
    """
    out = Path(out_dir)
    manifest = load_manifest(out)
    cache = _read_optima(out)
    todo = []
    for _, inst_entry in manifest_instances(manifest):
        if inst_entry["id"] not in cache["instances"]:
            todo.append((str(out / inst_entry["path"]), inst_entry["id"]))
    if todo:
        for instance_id, record in _map_tasks(_solve_task, todo, workers):
            cache["instances"][instance_id] = record
        _write_json(out / OPTIMA_NAME, cache)
    elif not (out / OPTIMA_NAME).exists():
        _write_json(out / OPTIMA_NAME, cache)
    return cache, len(todo)


def _map_tasks(fn, tasks: list, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _baseline_task(args: tuple[str, str, int, int]) -> tuple[str, dict[str, float]]:
    instance_path, instance_id, repetitions, master_seed = args
    instance = read_instance(instance_path)
    gaps: dict[str, float] = {}
    for algo in BASELINE_ALGOS:
        if algo in ("FI", "NI"):
            specs = [HeuristicSpec(variant=algo)]
        else:
            specs = [
                HeuristicSpec(variant=algo, seed=derive_seed(master_seed, "baseline", instance_id, algo, r))
                for r in range(repetitions)
            ]
        lengths = [run_heuristic(instance, spec).length for spec in specs]
        gaps[algo] = float(np.mean(lengths))
    return instance_id, gaps


def run_baselines(out_dir: Union[str, Path], repetitions: int = 10, workers: int = 1) -> dict:
    """Run the four construction heuristics against cached optima.

    Randomized heuristics (NN with random starts, RI) are averaged over
    ``repetitions`` seeded runs per instance before set-level aggregation.
    """
    out = Path(out_dir)
    manifest = load_manifest(out)
    optima, _ = solve_all(out, workers=workers)
    master_seed = manifest["master_seed"]

    tasks = [
        (str(out / e["path"]), e["id"], repetitions, master_seed)
        for _, e in manifest_instances(manifest)
    ]
    mean_lengths = dict(_map_tasks(_baseline_task, tasks, workers))

    algorithms: dict[str, dict] = {algo: {"sets": {}} for algo in BASELINE_ALGOS}
    for set_entry in manifest["sets"]:
        for algo in BASELINE_ALGOS:
            per_instance = []
            for inst_entry in set_entry["instances"]:
                opt = optima["instances"][inst_entry["id"]]["length"]
                per_instance.append(optimality_gap(mean_lengths[inst_entry["id"]][algo], opt))
            algorithms[algo]["sets"][set_entry["name"]] = _gap_stats(per_instance)

    fragment = {"type": "baselines", "repetitions": repetitions, "algorithms": algorithms}
    _write_json(out / "baselines.json", fragment)
    return fragment


def _gap_stats(per_instance: Sequence[float]) -> dict:
    values = [float(v) for v in per_instance]
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return {"per_instance_gap": values, "mean_gap": float(np.mean(values)), "std_gap": std}


def build_backend(spec: dict, seed: int, transcript_path=None):
    """Construct a backend from its manifest/config description."""
    kind = spec.get("kind", "builtin")
    if kind == "builtin":
        return BuiltinGeneticBackend(
            seed=seed,
            tournament_size=spec.get("tournament_size", 2),
            mutation=spec.get("mutation", "segment_reversal"),
            mutation_prob=spec.get("mutation_prob", 0.5),
            transcript_path=transcript_path,
        )
    if kind == "scripted":
        return ScriptedBackend.from_jsonl(spec["transcript"], fill_seed=seed)
    if kind == "remote":
        config = RemoteConfig(
            endpoint=spec["endpoint"],
            model=spec["model"],
            auth_env=spec.get("auth_env", "LMEA_API_TOKEN"),
            timeout_s=spec.get("timeout_s", 60.0),
            retry_budget=spec.get("retry_budget", 3),
            requests_per_minute=spec.get("requests_per_minute", 60.0),
        )
        return RemoteChatBackend(config, fill_seed=seed, transcript_path=transcript_path)
    raise ValueError(f"unknown backend kind {kind!r}")


def _evolve_task(args: tuple) -> tuple[str, dict, list[str], list[str]]:
    instance_path, instance_id, set_name, index, mode, backend_spec, config_dict, master_seed, optimum, transcripts = args
    instance = read_instance(instance_path)
    config = EvolveConfig(**config_dict)
    config = replace(config, seed=derive_seed(master_seed, "evolve", mode, instance_id))
    backend = build_backend(backend_spec, derive_seed(master_seed, "backend", mode, instance_id))
    log = evolve(instance, config, backend, optimal_length=optimum)

    convergence = ["generation,best_gap_pct,mean_gap_pct"]
    for record in log.records:
        best_gap = 100.0 * optimality_gap(record.best_length, optimum)
        mean_gap = 100.0 * optimality_gap(record.mean_length, optimum)
        convergence.append(f"{record.gen},{best_gap:.10g},{mean_gap:.10g}")

    summary = {
        "final_gap": optimality_gap(log.best.length, optimum),
        "generations_to_optimum": log.generations_to_optimum,
        "evaluations": log.evaluations,
        "completed": log.completed,
    }
    return instance_id, summary, run_log_lines(log), convergence


def run_evolve(out_dir: Union[str, Path], mode: str = "lmea", backend_spec: dict | None = None,
               config_overrides: dict | None = None, workers: int = 1,
               transcripts: bool = False) -> dict:
    """Run one evolutionary mode over the whole benchmark.

    ``lmea_star`` is the self-adaptation-off ablation of lmea mode. Per-run
    logs land in runlogs/, per-run convergence series in convergence/.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    out = Path(out_dir)
    manifest = load_manifest(out)
    optima, _ = solve_all(out, workers=workers)
    master_seed = manifest["master_seed"]
    backend_spec = backend_spec or {"kind": "builtin"}

    config = EvolveConfig(
        mode="opro" if mode == "opro" else "lmea",
        self_adapt=mode != "lmea_star",
        backend=backend_spec.get("kind", "builtin"),
    )
    if config_overrides:
        config = replace(config, **config_overrides)

    (out / "runlogs").mkdir(exist_ok=True)
    (out / "convergence").mkdir(exist_ok=True)

    tasks = []
    for set_entry in manifest["sets"]:
        for index, inst_entry in enumerate(set_entry["instances"]):
            tasks.append((
                str(out / inst_entry["path"]), inst_entry["id"], set_entry["name"], index,
                mode, backend_spec, _config_dict(config), master_seed,
                optima["instances"][inst_entry["id"]]["length"], transcripts,
            ))
    results = dict()
    for instance_id, summary, log_lines, convergence in _map_tasks(_evolve_task, tasks, workers):
        results[instance_id] = (summary, log_lines, convergence)

    sets_payload = {}
    for set_entry in manifest["sets"]:
        per_instance = []
        generations = []
        for index, inst_entry in enumerate(set_entry["instances"]):
            summary, log_lines, convergence = results[inst_entry["id"]]
            stem = f"{set_entry['name']}-{index:02d}-{mode}"
            (out / "runlogs" / f"{stem}.jsonl").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
            (out / "convergence" / f"{stem}.csv").write_text("\n".join(convergence) + "\n", encoding="utf-8")
            per_instance.append(summary["final_gap"])
            generations.append(summary["generations_to_optimum"])
        stats = _gap_stats(per_instance)
        hits = [g for g in generations if g is not None]
        stats["generations"] = generations
        stats["successes"] = len(hits)
        stats["gens_mean"] = float(np.mean(hits)) if hits else None
        stats["gens_std"] = (float(np.std(hits, ddof=1)) if len(hits) > 1 else 0.0) if hits else None
        sets_payload[set_entry["name"]] = stats

    fragment = {
        "type": "evolve",
        "mode": mode,
        "backend": backend_spec,
        "config": _config_dict(config),
        "algorithms": {mode: {"sets": sets_payload}},
    }
    _write_json(out / f"evolve-{mode}.json", fragment)
    return fragment


def _config_dict(config: EvolveConfig) -> dict:
    from dataclasses import asdict

    return asdict(config)
