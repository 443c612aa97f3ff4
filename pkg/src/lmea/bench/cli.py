"""Command line interface: gen, solve, baselines, evolve, report.

A typical full run:

    lmea gen --out bench
    lmea solve --out bench --workers 4
    lmea baselines --out bench
    lmea evolve --out bench --mode lmea
    lmea evolve --out bench --mode opro
    lmea report --out bench
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .manifest import DEFAULT_KINDS, DEFAULT_PER_SET, DEFAULT_SIZES, generate_benchmark
from .report import write_report
from .runner import MODES, run_baselines, run_evolve, solve_all

CONFIG_EVOLVE_KEYS = (
    "population_size", "max_generations", "stagnation_window", "temperature_increment",
    "initial_temperature", "max_temperature", "self_adapt", "reset_counter_on_bump",
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="bench-out", help="benchmark directory (default: bench-out)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmea", description="Evolutionary TSP benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate benchmark instances and the manifest")
    p_gen.add_argument("--out", default="bench-out")
    p_gen.add_argument("--kinds", default=",".join(DEFAULT_KINDS), help="comma list of rue,clu")
    p_gen.add_argument("--sizes", default=",".join(str(s) for s in DEFAULT_SIZES), help="comma list of node counts")
    p_gen.add_argument("--per-set", type=int, default=DEFAULT_PER_SET, help="instances per test set")
    p_gen.add_argument("--seed", type=int, default=2023, help="master seed")

    p_solve = sub.add_parser("solve", help="certify optimal tours for every instance")
    _add_common(p_solve)

    p_base = sub.add_parser("baselines", help="run NN/FI/NI/RI against cached optima")
    _add_common(p_base)
    p_base.add_argument("--repetitions", type=int, default=10, help="seeded repetitions for randomized heuristics")

    p_evolve = sub.add_parser("evolve", help="run an evolutionary mode over the benchmark")
    _add_common(p_evolve)
    p_evolve.add_argument("--mode", choices=MODES, default="lmea")
    p_evolve.add_argument("--backend", choices=("builtin", "remote", "scripted"), default=None,
                          help="backend kind (overrides --config)")
    p_evolve.add_argument("--config", default=None, help="JSON config file with evolve/backend sections")
    p_evolve.add_argument("--transcripts", action="store_true", help="persist prompt/response transcripts")
    p_evolve.add_argument("--population-size", type=int, default=None)
    p_evolve.add_argument("--generations", type=int, default=None)
    p_evolve.add_argument("--stagnation-window", type=int, default=None)
    p_evolve.add_argument("--temperature-increment", type=float, default=None)
    p_evolve.add_argument("--initial-temperature", type=float, default=None)
    p_evolve.add_argument("--max-temperature", type=float, default=None)

    p_report = sub.add_parser("report", help="merge fragments into report.txt / report.csv")
    p_report.add_argument("--out", default="bench-out")
    p_report.add_argument("fragments", nargs="*", help="fragment files (default: all in --out)")

    return parser


def _evolve_settings(args: argparse.Namespace) -> tuple[dict, dict]:
    file_config: dict = {}
    if args.config:
        file_config = json.loads(Path(args.config).read_text(encoding="utf-8"))
    backend_spec = dict(file_config.get("backend", {"kind": "builtin"}))
    if args.backend:
        backend_spec["kind"] = args.backend

    overrides = {k: v for k, v in file_config.get("evolve", {}).items() if k in CONFIG_EVOLVE_KEYS}
    flag_map = {
        "population_size": args.population_size,
        "max_generations": args.generations,
        "stagnation_window": args.stagnation_window,
        "temperature_increment": args.temperature_increment,
        "initial_temperature": args.initial_temperature,
        "max_temperature": args.max_temperature,
    }
    overrides.update({k: v for k, v in flag_map.items() if v is not None})
    return backend_spec, overrides


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "gen":
        kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
        sizes = tuple(int(s) for s in args.sizes.split(",") if s.strip())
        manifest = generate_benchmark(args.out, kinds=kinds, sizes=sizes,
                                      per_set=args.per_set, master_seed=args.seed)
        count = sum(len(s["instances"]) for s in manifest["sets"])
        print(f"wrote {count} instances in {len(manifest['sets'])} sets under {args.out}")
        return 0

    if args.command == "solve":
        optima, solved = solve_all(args.out, workers=args.workers)
        print(f"optima certified: {len(optima['instances'])} total, {solved} newly solved")
        return 0

    if args.command == "baselines":
        fragment = run_baselines(args.out, repetitions=args.repetitions, workers=args.workers)
        print(f"baseline fragment written ({len(fragment['algorithms'])} algorithms)")
        return 0

    if args.command == "evolve":
        backend_spec, overrides = _evolve_settings(args)
        fragment = run_evolve(args.out, mode=args.mode, backend_spec=backend_spec,
                              config_overrides=overrides, workers=args.workers,
                              transcripts=args.transcripts)
        sets = fragment["algorithms"][args.mode]["sets"]
        successes = sum(s["successes"] for s in sets.values())
        print(f"evolve[{args.mode}] fragment written; {successes} optimum hits across {len(sets)} sets")
        return 0

    if args.command == "report":
        fragments = args.fragments or None
        merged = write_report(args.out, fragments)
        print(f"report written for {len(merged['algorithms'])} algorithms")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
