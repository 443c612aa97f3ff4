"""Evolutionary Euclidean TSP optimization with pluggable offspring backends.

The package bundles the optimizer itself (engine + backends + prompt codec),
ground-truth machinery (exact solvers, construction heuristics, seeded
instance generators), sklearn-style estimator front ends, and a benchmark
CLI under ``lmea.bench``.
"""

from .backends import (
    BackendError,
    BackendReport,
    BuiltinGeneticBackend,
    OffspringBackend,
    OffspringRequest,
    RemoteChatBackend,
    RemoteConfig,
    ScriptedBackend,
    order_crossover,
)
from .engine import (
    EvolveConfig,
    GenerationRecord,
    Population,
    RunLog,
    evolve,
    init_population,
    survivor_select,
    update_temperature,
    write_run_log,
)
from .estimators import (
    EvolutionaryTSP,
    ExactTSP,
    InsertionTSP,
    NearestNeighborTSP,
    check_coords,
    instance_from_coords,
)
from .exact import ExactResult, branch_bound, brute_force, exact_solve, held_karp
from .generators import GenSpec, gen_clu, gen_rue, generate, read_instance, write_instance
from .heuristics import HeuristicSpec, insertion, insertion_cost, nearest_neighbor, run_heuristic
from .prompts import (
    ParsedResponse,
    PromptBundle,
    build_lmea_prompt,
    build_opro_prompt,
    parse_response,
)
from .seeding import derive_seed
from .tsp import (
    ConsistencyError,
    Instance,
    InvalidTourError,
    ScoredTour,
    Tour,
    TourViolation,
    canonicalize,
    distance,
    distance_matrix,
    optimality_gap,
    score,
    tour_length,
    validate_tour,
)

__version__ = "0.1.0"
