"""Pluggable offspring generators behind one interface.

A backend turns an OffspringRequest (population snapshot, count, temperature,
mode) into validated tours. Three implementations:

* RemoteChatBackend    -- HTTP chat-completions service, prompts over the wire
* ScriptedBackend      -- replays recorded responses, for offline determinism
* BuiltinGeneticBackend -- classical permutation GA standing in for a model

Validation happens at the interface boundary: no backend is trusted to
return well-formed tours, and shortfalls after the retry budget are filled
with seeded swap mutants of current population members so every report
carries exactly ``count`` offspring.
"""

from __future__ import annotations

import json
import os
import threading
import time
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .prompts import (
    PromptBundle,
    RES_CLOSE,
    RES_OPEN,
    SELECTION_CLOSE,
    SELECTION_OPEN,
    build_lmea_prompt,
    build_opro_prompt,
    format_tour,
    parse_response,
)
from .tsp import Instance, ScoredTour, Tour, TourViolation, canonicalize, validate_tour

MUTATION_KINDS = ("swap", "segment_reversal")


class BackendError(RuntimeError):
    """Fatal backend failure; the evolutionary run cannot continue."""


class _TransientError(Exception):
    """One failed transport attempt; retried within the budget."""


@dataclass(frozen=True)
class OffspringRequest:
    """One generation's ask: produce ``count`` tours from this population."""

    instance: Instance
    population: tuple[ScoredTour, ...]
    count: int
    temperature: float
    mode: str = "lmea"

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be at least 1, got {self.count}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be nonnegative, got {self.temperature}")
        if self.mode not in ("lmea", "opro"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.population:
            raise ValueError("population must be nonempty")


@dataclass
class BackendReport:
    """What one generate() call produced, transcripts included."""

    offspring: list[Tour]
    raw_exchanges: list[tuple[str, str]]
    invalid_count: int
    retries_used: int


def swap_mutation(tour: Sequence[int], rng: np.random.Generator) -> Tour:
    """Exchange two random positions."""
    n = len(tour)
    i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
    out = list(tour)
    out[i], out[j] = out[j], out[i]
    return tuple(out)


def segment_reversal_mutation(tour: Sequence[int], rng: np.random.Generator) -> Tour:
    """Reverse a random contiguous segment (a 2-opt style move)."""
    n = len(tour)
    i, j = sorted(int(v) for v in rng.choice(n, size=2, replace=False))
    out = list(tour)
    out[i:j + 1] = reversed(out[i:j + 1])
    return tuple(out)


_MUTATIONS = {
    "swap": swap_mutation,
    "segment_reversal": segment_reversal_mutation,
}


def order_crossover(parent1: Sequence[int], parent2: Sequence[int], cut_start: int, cut_end: int) -> Tour:
    """Order crossover (OX): keep parent1's cut segment, fill the remaining
    positions after the cut (wrapping) with parent2's nodes in parent2 order
    starting after the cut (wrapping)."""
    n = len(parent1)
    if not (0 <= cut_start < cut_end <= n):
        raise ValueError(f"bad cut [{cut_start}, {cut_end}) for n={n}")
    child: list[int | None] = [None] * n
    child[cut_start:cut_end] = parent1[cut_start:cut_end]
    kept = set(parent1[cut_start:cut_end])
    donor = [g for g in (list(parent2[cut_end:]) + list(parent2[:cut_end])) if g not in kept]
    positions = list(range(cut_end, n)) + list(range(0, cut_start))
    for pos, gene in zip(positions, donor):
        child[pos] = gene
    return tuple(int(g) for g in child)  # type: ignore[arg-type]


class OffspringBackend(ABC):
    """Common driver: attempt/parse/retry/validate/fill.

    Subclasses implement ``_attempt`` which returns raw response text, None
    when no further attempt is possible (scripted source drained), or raises
    BackendError for fatal conditions.
    """

    def __init__(self, retry_budget: int = 3, fill_seed: int = 0,
                 transcript_path: Union[str, Path, None] = None) -> None:
        self.retry_budget = retry_budget
        self._fill_rng = np.random.Generator(np.random.PCG64(fill_seed))
        self._transcript_path = Path(transcript_path) if transcript_path is not None else None

    @abstractmethod
    def _attempt(self, request: OffspringRequest, prompt: PromptBundle) -> str | None:
        ...

    def _build_prompt(self, request: OffspringRequest) -> PromptBundle:
        if request.mode == "opro":
            return build_opro_prompt(request.instance, request.population, request.count)
        return build_lmea_prompt(request.instance, request.population, request.count)

    def generate(self, request: OffspringRequest) -> BackendReport:
        prompt = self._build_prompt(request)
        n = request.instance.n
        offspring: list[Tour] = []
        exchanges: list[tuple[str, str]] = []
        invalid = 0
        attempts = 0
        transient: _TransientError | None = None

        while len(offspring) < request.count and attempts < 1 + self.retry_budget:
            try:
                response = self._attempt(request, prompt)
            except _TransientError as err:
                transient = err
                attempts += 1
                continue
            if response is None:
                if attempts == 0:
                    raise BackendError("scripted response source is exhausted")
                break
            attempts += 1
            exchanges.append((prompt.text, response))
            parsed = parse_response(response, n)
            invalid += len(parsed.rejected)
            for tour in parsed.offspring:
                if len(offspring) >= request.count:
                    break
                checked = validate_tour(n, tour)  # boundary check, backends are not trusted
                if isinstance(checked, TourViolation):
                    invalid += 1
                    continue
                offspring.append(checked)

        if not exchanges and transient is not None:
            raise BackendError(f"transport failed after {attempts} attempts: {transient}")

        while len(offspring) < request.count:
            member = request.population[int(self._fill_rng.integers(len(request.population)))]
            offspring.append(swap_mutation(member.tour, self._fill_rng))

        self._persist(exchanges)
        return BackendReport(
            offspring=offspring,
            raw_exchanges=exchanges,
            invalid_count=invalid,
            retries_used=max(0, attempts - 1),
        )

    def _persist(self, exchanges: Iterable[tuple[str, str]]) -> None:
        if self._transcript_path is None:
            return
        with self._transcript_path.open("a", encoding="utf-8") as fh:
            for prompt_text, response in exchanges:
                fh.write(json.dumps({"prompt": prompt_text, "response": response}, sort_keys=True))
                fh.write("\n")


class BuiltinGeneticBackend(OffspringBackend):
    """Classical permutation GA playing the operator role offline.

    In lmea mode each offspring comes from tournament-selected parents via
    order crossover, then mutation with probability min(1, prob * temperature);
    the temperature also scales how many mutation applications one event
    stacks, so raising it buys genuinely longer jumps, not just more of the
    same single move. Offspring that duplicate a cycle already in the
    population are re-mutated (a few tries): under elitist selection with no
    deduplication a duplicate is a wasted evaluation, and without this guard
    the population freezes into copies of one local optimum.

    In opro mode there is no operator structure: each offspring is a copy of
    a tournament-drawn member, mutated with the same temperature-gated
    probability and nothing else (no crossover, no duplicate guard).

    Offspring are rendered as tagged response text, so transcripts replay
    through ScriptedBackend unchanged.
    """

    _CLONE_GUARD_TRIES = 8

    def __init__(self, seed: int = 0, tournament_size: int = 2, mutation: str = "segment_reversal",
                 mutation_prob: float = 0.5, retry_budget: int = 3,
                 transcript_path: Union[str, Path, None] = None) -> None:
        super().__init__(retry_budget=retry_budget, fill_seed=seed, transcript_path=transcript_path)
        if mutation not in MUTATION_KINDS:
            raise ValueError(f"unknown mutation kind {mutation!r}, expected one of {MUTATION_KINDS}")
        if tournament_size < 1:
            raise ValueError(f"tournament size must be positive, got {tournament_size}")
        if not (0.0 <= mutation_prob <= 1.0):
            raise ValueError(f"mutation probability must be in [0, 1], got {mutation_prob}")
        self.seed = seed
        self.tournament_size = tournament_size
        self.mutation = mutation
        self.mutation_prob = mutation_prob
        self._rng = np.random.Generator(np.random.PCG64(seed))

    def _tournament(self, population: Sequence[ScoredTour]) -> tuple[int, ScoredTour]:
        size = min(self.tournament_size, len(population))
        picks = [int(v) for v in self._rng.choice(len(population), size=size, replace=False)]
        best = min(picks, key=lambda i: (population[i].length, i))
        return best, population[best]

    def _attempt(self, request: OffspringRequest, prompt: PromptBundle) -> str:
        rng = self._rng
        mutate = _MUTATIONS[self.mutation]
        prob = min(1.0, self.mutation_prob * request.temperature)
        strength = max(1, int(round(request.temperature)))
        incumbents = {canonicalize(m.tour) for m in request.population}
        lines: list[str] = []
        for _ in range(request.count):
            if request.mode == "lmea":
                i, parent1 = self._tournament(request.population)
                j, parent2 = self._tournament(request.population)
                a, b = sorted(int(v) for v in rng.choice(request.instance.n + 1, size=2, replace=False))
                child = order_crossover(parent1.tour, parent2.tour, a, b)
                if rng.random() < prob:
                    for _ in range(strength):
                        child = mutate(child, rng)
                tries = 0
                while canonicalize(child) in incumbents and tries < self._CLONE_GUARD_TRIES:
                    child = mutate(child, rng)
                    tries += 1
                lines.append(f"{SELECTION_OPEN}{i},{j}{SELECTION_CLOSE}")
            else:
                _, parent = self._tournament(request.population)
                child = parent.tour
                if rng.random() < prob:
                    for _ in range(strength):
                        child = mutate(child, rng)
            lines.append(f"{RES_OPEN}{format_tour(child)}{RES_CLOSE}")
        return "\n".join(lines)


class ScriptedBackend(OffspringBackend):
    """Replays recorded responses in order.

    Each generate() call consumes one response, then further responses while
    short of ``count`` (mirroring live retry consumption). A call that starts
    with nothing left to replay is a fatal underrun.
    """

    def __init__(self, responses: Sequence[str], retry_budget: int = 3, fill_seed: int = 0) -> None:
        super().__init__(retry_budget=retry_budget, fill_seed=fill_seed)
        self._responses = deque(responses)

    @classmethod
    def from_jsonl(cls, path: Union[str, Path], **kwargs) -> "ScriptedBackend":
        responses = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                responses.append(json.loads(line)["response"])
        return cls(responses, **kwargs)

    def remaining(self) -> int:
        return len(self._responses)

    def _attempt(self, request: OffspringRequest, prompt: PromptBundle) -> str | None:
        if not self._responses:
            return None
        return self._responses.popleft()


class RateLimiter:
    """Spaces requests at least ``interval`` seconds apart, across threads."""

    def __init__(self, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep) -> None:
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_allowed = 0.0

    def wait(self, interval: float) -> None:
        with self._lock:
            now = self._clock()
            delay = self._next_allowed - now
            self._next_allowed = max(now, self._next_allowed) + interval
        if delay > 0:
            self._sleep(delay)


# One limiter shared by every remote backend in the process, so concurrent
# runs cannot jointly exceed the configured request rate.
GLOBAL_RATE_LIMITER = RateLimiter()


@dataclass
class RemoteConfig:
    """Connection settings for a chat-completions style HTTP service."""

    endpoint: str
    model: str
    auth_env: str = "LMEA_API_TOKEN"
    timeout_s: float = 60.0
    retry_budget: int = 3
    requests_per_minute: float = 60.0


def _requests_transport(url: str, payload: dict, headers: dict, timeout: float) -> tuple[int, dict]:
    import requests

    resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
    try:
        body = resp.json()
    except ValueError:
        body = {}
    return resp.status_code, body


class RemoteChatBackend(OffspringBackend):
    """Talks to a chat-completions HTTP endpoint.

    One completion per attempt carries the whole batch of offspring. The
    bearer token comes from the environment variable named in the config;
    the request temperature is forwarded into the payload untouched.
    """

    def __init__(self, config: RemoteConfig, transport: Callable[..., tuple[int, dict]] | None = None,
                 limiter: RateLimiter | None = None, fill_seed: int = 0,
                 transcript_path: Union[str, Path, None] = None) -> None:
        super().__init__(retry_budget=config.retry_budget, fill_seed=fill_seed,
                         transcript_path=transcript_path)
        self.config = config
        self._transport = transport or _requests_transport
        self._limiter = limiter or GLOBAL_RATE_LIMITER

    def build_payload(self, request: OffspringRequest, prompt: PromptBundle) -> dict:
        return {
            "model": self.config.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": prompt.text}],
        }

    def _attempt(self, request: OffspringRequest, prompt: PromptBundle) -> str:
        token = os.environ.get(self.config.auth_env)
        if not token:
            raise BackendError(f"auth token not found in environment variable {self.config.auth_env!r}")
        payload = self.build_payload(request, prompt)
        headers = {"Authorization": f"Bearer {token}", "Content-Type": "application/json"}
        if self.config.requests_per_minute > 0:
            self._limiter.wait(60.0 / self.config.requests_per_minute)
        try:
            status, body = self._transport(self.config.endpoint, payload, headers, self.config.timeout_s)
        except Exception as err:  # noqa: BLE001 - any transport failure is retried
            raise _TransientError(str(err)) from err
        if status in (401, 403):
            raise BackendError(f"authentication rejected by service (HTTP {status})")
        if status != 200:
            raise _TransientError(f"HTTP {status}")
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise BackendError(f"malformed service payload: {json.dumps(body)[:200]}") from None
        if not isinstance(content, str):
            raise BackendError("malformed service payload: message content is not text")
        return content
