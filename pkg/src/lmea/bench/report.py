"""Merges result fragments and renders the summary table (text and CSV).

Gaps are percentages at two decimals, mean over each set's instances with
sample standard deviation. The best gap per set is starred. Evolutionary
algorithms additionally report generations-to-optimum as "mean +/- std
(successes)", or "N/A (0)" when a set had no success.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence, Union

# Fixed column order: the classical baselines, then the evolutionary modes.
ALGO_ORDER = ("NN", "FI", "NI", "RI", "lmea", "opro", "lmea_star")
EVOLUTIONARY = ("lmea", "opro", "lmea_star")


def merge_fragments(fragments: Iterable[dict]) -> dict:
    """Combine fragment payloads into one algorithms map, order-independent."""
    algorithms: dict[str, dict] = {}
    for fragment in fragments:
        for algo, payload in fragment.get("algorithms", {}).items():
            slot = algorithms.setdefault(algo, {"sets": {}})
            slot["sets"].update(payload["sets"])
    return {"algorithms": algorithms}


def _set_sort_key(name: str) -> tuple:
    kind, _, size = name.partition("-")
    try:
        return (kind, int(size))
    except ValueError:
        return (kind, 0)


def _ordered_algos(algorithms: dict) -> list[str]:
    known = [a for a in ALGO_ORDER if a in algorithms]
    extra = sorted(a for a in algorithms if a not in ALGO_ORDER)
    return known + extra


def _all_sets(algorithms: dict) -> list[str]:
    names = set()
    for payload in algorithms.values():
        names.update(payload["sets"].keys())
    return sorted(names, key=_set_sort_key)


def _gap_cell(stats: dict | None, best: bool) -> str:
    if stats is None:
        return "-"
    text = f"{100 * stats['mean_gap']:.2f} +/- {100 * stats['std_gap']:.2f}"
    return f"*{text}*" if best else text


def _gens_cell(stats: dict | None) -> str:
    if stats is None:
        return "-"
    if stats.get("successes", 0) == 0:
        return "N/A (0)"
    return f"{stats['gens_mean']:.2f} +/- {stats['gens_std']:.2f} ({stats['successes']})"


def render_text(merged: dict) -> str:
    algorithms = merged["algorithms"]
    algos = _ordered_algos(algorithms)
    sets = _all_sets(algorithms)
    gens_algos = [a for a in algos if a in EVOLUTIONARY and algorithms.get(a)]

    header = ["Test set"] + [f"{a} gap%" for a in algos] + [f"{a} gens" for a in gens_algos]
    rows = [header]
    for set_name in sets:
        stats_by_algo = {a: algorithms[a]["sets"].get(set_name) for a in algos}
        present = {a: s for a, s in stats_by_algo.items() if s is not None}
        best_mean = min(s["mean_gap"] for s in present.values()) if present else None
        row = [set_name]
        for a in algos:
            stats = stats_by_algo[a]
            is_best = stats is not None and best_mean is not None and stats["mean_gap"] <= best_mean
            row.append(_gap_cell(stats, is_best))
        for a in gens_algos:
            row.append(_gens_cell(algorithms[a]["sets"].get(set_name)))
        rows.append(row)

    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[c] for c in range(len(widths))))
    return "\n".join(lines) + "\n"


def render_csv(merged: dict) -> str:
    algorithms = merged["algorithms"]
    lines = ["set,algorithm,mean_gap_pct,std_gap_pct,generations_mean,generations_std,successes"]
    for set_name in _all_sets(algorithms):
        for algo in _ordered_algos(algorithms):
            stats = algorithms[algo]["sets"].get(set_name)
            if stats is None:
                continue
            gm = f"{stats['gens_mean']:.6g}" if stats.get("gens_mean") is not None else ""
            gs = f"{stats['gens_std']:.6g}" if stats.get("gens_std") is not None else ""
            succ = stats.get("successes", "")
            lines.append(
                f"{set_name},{algo},{100 * stats['mean_gap']:.2f},{100 * stats['std_gap']:.2f},{gm},{gs},{succ}"
            )
    return "\n".join(lines) + "\n"


def write_report(out_dir: Union[str, Path], fragment_paths: Sequence[Union[str, Path]] | None = None) -> dict:
    """Merge fragment files (default: all in out_dir) and write report files."""
    out = Path(out_dir)
    if fragment_paths is None:
        fragment_paths = sorted(out.glob("baselines.json")) + sorted(out.glob("evolve-*.json"))
    fragments = [json.loads(Path(p).read_text(encoding="utf-8")) for p in fragment_paths]
    merged = merge_fragments(fragments)
    (out / "report.txt").write_text(render_text(merged), encoding="utf-8")
    (out / "report.csv").write_text(render_csv(merged), encoding="utf-8")
    return merged
