"""Benchmark manifest: which instances exist, where they live, how they were
seeded. Everything is derived from one master seed so a re-run is
byte-identical."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence, Union

from ..generators import (
    DEFAULT_SIGMA,
    GENERATOR_VERSION,
    RNG_ALGORITHM,
    default_clusters,
    gen_clu,
    gen_rue,
    write_instance,
)
from ..seeding import derive_seed

DEFAULT_KINDS = ("rue", "clu")
DEFAULT_SIZES = (10, 15, 20, 25)
DEFAULT_PER_SET = 5
MANIFEST_NAME = "manifest.json"
INSTANCE_DIR = "instances"


def set_name(kind: str, n: int) -> str:
    return f"{kind}-{n}"


def generate_benchmark(out_dir: Union[str, Path], kinds: Sequence[str] = DEFAULT_KINDS,
                       sizes: Sequence[int] = DEFAULT_SIZES, per_set: int = DEFAULT_PER_SET,
                       master_seed: int = 2023) -> dict:
    """Write instance files plus the manifest; returns the manifest dict."""
    out = Path(out_dir)
    inst_dir = out / INSTANCE_DIR
    inst_dir.mkdir(parents=True, exist_ok=True)

    sets = []
    for kind in kinds:
        for n in sizes:
            entries = []
            for i in range(per_set):
                seed = derive_seed(master_seed, "gen", kind, n, i)
                if kind == "rue":
                    instance = gen_rue(n, seed)
                else:
                    instance = gen_clu(n, seed)
                rel_path = f"{INSTANCE_DIR}/{set_name(kind, n)}-{i:02d}.tsp"
                write_instance(instance, out / rel_path)
                entries.append({"id": instance.id, "seed": seed, "path": rel_path})
            set_entry = {"name": set_name(kind, n), "kind": kind, "n": n, "instances": entries}
            if kind == "clu":
                set_entry["num_clusters"] = default_clusters(n)
                set_entry["sigma"] = DEFAULT_SIGMA
            sets.append(set_entry)

    manifest = {
        "version": 1,
        "master_seed": master_seed,
        "generator": {"rng": RNG_ALGORITHM, "version": GENERATOR_VERSION},
        "sets": sets,
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def load_manifest(out_dir: Union[str, Path]) -> dict:
    path = Path(out_dir) / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"no manifest at {path}; run the gen command first")
    return json.loads(path.read_text(encoding="utf-8"))


def manifest_instances(manifest: dict) -> list[tuple[dict, dict]]:
    """Flatten to (set entry, instance entry) pairs in manifest order."""
    pairs = []
    for set_entry in manifest["sets"]:
        for inst_entry in set_entry["instances"]:
            pairs.append((set_entry, inst_entry))
    return pairs
