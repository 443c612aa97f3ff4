"""Benchmark harness: test-set generation, optimum certification, baseline
and evolutionary runs, and table/CSV reporting."""

from .manifest import generate_benchmark, load_manifest
from .report import merge_fragments, render_csv, render_text, write_report
from .runner import run_baselines, run_evolve, solve_all
