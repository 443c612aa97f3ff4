"""The generational loop: initialize, generate offspring, keep the best N,
adapt the temperature on stagnation, and log everything."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .backends import BackendError, OffspringBackend, OffspringRequest
from .generators import RNG_ALGORITHM
from .prompts import PROMPT_VERSION
from .tsp import REL_EPS, Instance, ScoredTour, TourViolation, canonicalize, score, validate_tour

PACKAGE_VERSION = "0.1.0"


@dataclass(frozen=True)
class EvolveConfig:
    """All evolutionary and adaptation parameters for one run."""

    population_size: int = 16
    max_generations: int = 250
    stagnation_window: int = 20
    temperature_increment: float = 0.1
    initial_temperature: float = 1.0
    max_temperature: float = 2.0
    mode: str = "lmea"
    self_adapt: bool = True
    seed: int = 0
    backend: str = "builtin"
    reset_counter_on_bump: bool = True

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError(f"population size must be at least 2, got {self.population_size}")
        if self.max_generations < 1:
            raise ValueError(f"max generations must be at least 1, got {self.max_generations}")
        if self.stagnation_window < 1:
            raise ValueError(f"stagnation window must be at least 1, got {self.stagnation_window}")
        if self.temperature_increment <= 0:
            raise ValueError(f"temperature increment must be positive, got {self.temperature_increment}")
        if not (0 < self.initial_temperature <= self.max_temperature):
            raise ValueError(
                f"need 0 < initial temperature <= max temperature, got "
                f"{self.initial_temperature} and {self.max_temperature}"
            )
        if self.mode not in ("lmea", "opro"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class Population:
    """The current generation, sorted ascending by length."""

    members: tuple[ScoredTour, ...]

    @property
    def best(self) -> ScoredTour:
        return self.members[0]

    @property
    def mean_length(self) -> float:
        return sum(m.length for m in self.members) / len(self.members)


@dataclass(frozen=True)
class AdaptState:
    """Temperature plus the count of consecutive non-improving generations."""

    temperature: float
    stagnation_counter: int = 0


@dataclass(frozen=True)
class GenerationRecord:
    """Per-generation telemetry behind convergence curves."""

    gen: int
    best_length: float
    mean_length: float
    temperature: float
    valid_offspring: int
    invalid_offspring: int
    improved: bool
    stagnation_counter: int
    population_size: int


@dataclass
class RunLog:
    """Everything one evolve() call produced."""

    config: EvolveConfig
    instance_id: str
    records: list[GenerationRecord]
    best: ScoredTour
    generations_to_optimum: int | None
    evaluations: int
    wall_time_s: float
    completed: bool = True
    error: str | None = None
    versions: dict[str, str] = field(default_factory=dict)


def _sort_members(members: Sequence[ScoredTour]) -> tuple[ScoredTour, ...]:
    return tuple(sorted(members, key=lambda m: (m.length, canonicalize(m.tour))))


def init_population(instance: Instance, size: int, seed: int) -> Population:
    """Uniformly random scored tours; duplicates permitted."""
    if size < 2:
        raise ValueError(f"population size must be at least 2, got {size}")
    rng = np.random.Generator(np.random.PCG64(seed))
    members = [score(instance, [int(v) for v in rng.permutation(instance.n)]) for _ in range(size)]
    return Population(members=_sort_members(members))


def survivor_select(current: Population, offspring: Sequence[ScoredTour]) -> Population:
    """Keep the best N of parents plus offspring, no deduplication.

    Ties break by canonical tour order, then incumbents before offspring,
    so selection is fully reproducible.
    """
    capacity = len(current.members)
    n = len(current.members[0].tour)
    keyed = []
    for rank, member in enumerate(current.members):
        keyed.append(((member.length, canonicalize(member.tour), 0, rank), member))
    for rank, member in enumerate(offspring):
        checked = validate_tour(n, member.tour)
        if isinstance(checked, TourViolation):
            raise ValueError(f"invalid offspring tour reached survivor selection: {checked}")
        keyed.append(((member.length, canonicalize(member.tour), 1, rank), member))
    keyed.sort(key=lambda pair: pair[0])
    return Population(members=tuple(member for _, member in keyed[:capacity]))


def update_temperature(state: AdaptState, improved: bool, config: EvolveConfig) -> AdaptState:
    """Stagnation rule: after ``stagnation_window`` consecutive non-improving
    generations, raise the temperature by one increment (clamped)."""
    if improved:
        return AdaptState(temperature=state.temperature, stagnation_counter=0)
    counter = state.stagnation_counter + 1
    if counter < config.stagnation_window:
        return AdaptState(temperature=state.temperature, stagnation_counter=counter)
    bumped = min(state.temperature + config.temperature_increment, config.max_temperature)
    return AdaptState(
        temperature=bumped,
        stagnation_counter=0 if config.reset_counter_on_bump else counter,
    )


def evolve(instance: Instance, config: EvolveConfig, backend: OffspringBackend,
           optimal_length: float | None = None) -> RunLog:
    """Run the full generational loop and return its log.

    Runs all ``max_generations`` generations with no early stopping; when
    ``optimal_length`` is supplied, the first generation whose best matches
    it (within tolerance) is recorded after the fact. A fatal backend error
    aborts the loop and flags the partial log as incomplete.
    """
    started = time.perf_counter()
    population = init_population(instance, config.population_size, config.seed)
    evaluations = config.population_size
    best = population.best
    state = AdaptState(temperature=config.initial_temperature, stagnation_counter=0)
    records: list[GenerationRecord] = []
    completed = True
    error = None

    for gen in range(1, config.max_generations + 1):
        request = OffspringRequest(
            instance=instance,
            population=population.members,
            count=config.population_size,
            temperature=state.temperature,
            mode=config.mode,
        )
        try:
            report = backend.generate(request)
        except BackendError as err:
            completed = False
            error = str(err)
            break
        scored = [score(instance, tour) for tour in report.offspring]
        evaluations += len(scored)
        population = survivor_select(population, scored)
        improved = population.best.length < best.length * (1.0 - REL_EPS)
        if improved:
            best = population.best
        used_temperature = state.temperature
        if config.self_adapt:
            state = update_temperature(state, improved, config)
        else:
            state = AdaptState(
                temperature=state.temperature,
                stagnation_counter=0 if improved else state.stagnation_counter + 1,
            )
        records.append(GenerationRecord(
            gen=gen,
            best_length=population.best.length,
            mean_length=population.mean_length,
            temperature=used_temperature,
            valid_offspring=len(report.offspring),
            invalid_offspring=report.invalid_count,
            improved=improved,
            stagnation_counter=state.stagnation_counter,
            population_size=len(population.members),
        ))

    generations_to_optimum = None
    if optimal_length is not None:
        for record in records:
            if record.best_length <= optimal_length * (1.0 + REL_EPS):
                generations_to_optimum = record.gen
                break

    return RunLog(
        config=config,
        instance_id=instance.id,
        records=records,
        best=best,
        generations_to_optimum=generations_to_optimum,
        evaluations=evaluations,
        wall_time_s=time.perf_counter() - started,
        completed=completed,
        error=error,
        versions={"package": PACKAGE_VERSION, "prompt": PROMPT_VERSION, "rng": RNG_ALGORITHM},
    )


def run_log_lines(log: RunLog) -> list[str]:
    """Serialize a run log as JSONL: header, one line per generation, trailer.

    Wall time is deliberately left out so logs are byte-identical across
    reruns with the same seeds.
    """
    header = {
        "record": "header",
        "config": asdict(log.config),
        "instance": log.instance_id,
        "versions": log.versions,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for record in log.records:
        body = asdict(record)
        body["record"] = "generation"
        lines.append(json.dumps(body, sort_keys=True))
    trailer = {
        "record": "result",
        "best_tour": list(log.best.tour),
        "best_length": log.best.length,
        "generations_to_optimum": log.generations_to_optimum,
        "evaluations": log.evaluations,
        "completed": log.completed,
        "error": log.error,
    }
    lines.append(json.dumps(trailer, sort_keys=True))
    return lines


def write_run_log(log: RunLog, path: Union[str, Path]) -> None:
    Path(path).write_text("\n".join(run_log_lines(log)) + "\n", encoding="utf-8")


def lmea_star_config(config: EvolveConfig) -> EvolveConfig:
    """The ablation variant: same parameters, self-adaptation disabled."""
    return replace(config, self_adapt=False)
