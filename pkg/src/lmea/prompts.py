"""Prompt construction and tagged-response parsing for offspring backends.

The wire contract with any text backend is a pair of tags: candidate tours
arrive between <res> and </res>, advisory parent selections between
<selection> and </selection>. See docs/protocol.md for the grammar.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .tsp import Instance, ScoredTour, Tour, TourViolation, canonicalize, validate_tour

PROMPT_VERSION = "lmea-prompt/1"

RES_OPEN = "<res>"
RES_CLOSE = "</res>"
SELECTION_OPEN = "<selection>"
SELECTION_CLOSE = "</selection>"

MODES = ("lmea", "opro")


@dataclass(frozen=True)
class PromptBundle:
    """A fully rendered prompt plus the bookkeeping needed to interpret it."""

    text: str
    mode: str
    expected_offspring: int
    instance_ref: str
    example_count: int


@dataclass(frozen=True)
class ParsedResponse:
    """Everything extracted from one backend response.

    ``rejected`` holds (raw fragment, reason) pairs for res blocks whose
    content failed validation. Parsing is total: arbitrary text never raises.
    """

    selections: tuple[tuple[int, ...], ...]
    offspring: tuple[Tour, ...]
    rejected: tuple[tuple[str, str], ...]


def format_tour(tour: Sequence[int]) -> str:
    """Render a tour as the comma-separated index list used in prompts."""
    return ",".join(str(int(v)) for v in tour)


def parse_index_list(fragment: str) -> Union[list[int], TourViolation]:
    """Parse a comma/space-separated index list; tolerant of mixed separators."""
    tokens = fragment.replace(",", " ").split()
    if not tokens:
        return TourViolation("not-an-index", "empty index list")
    values: list[int] = []
    for token in tokens:
        if not token.isdigit():
            return TourViolation("not-an-index", f"not an index: {token!r}")
        values.append(int(token))
    return values


def _problem_section(instance: Instance) -> str:
    lines = [
        f"You are solving a traveling salesman problem. {instance.n} points lie on a",
        "two-dimensional plane; the distance between two points is the Euclidean distance.",
        "",
        "Point coordinates (index: x y):",
    ]
    for i, (x, y) in enumerate(instance.coords):
        lines.append(f"{i}: {x:g} {y:g}")
    lines += [
        "",
        "A route visits every point exactly once and returns to its starting point.",
        f"A route is written as a comma-separated list of all {instance.n} point indices.",
        "Routes with shorter total length are better.",
    ]
    return "\n".join(lines)


def _examples_section(population: Sequence[ScoredTour]) -> str:
    ordered = sorted(population, key=lambda s: (-s.length, canonicalize(s.tour)))
    lines = [
        f"Here are {len(ordered)} example routes with their lengths, ordered from worst",
        "(longest) to best (shortest):",
        "",
    ]
    for i, member in enumerate(ordered):
        lines.append(f"{i}: route {format_tour(member.tour)} length {member.length:.2f}")
    return "\n".join(lines)


def _lmea_instructions(n: int, count: int) -> str:
    return "\n".join(
        [
            "You are the genetic operators of an evolutionary optimizer. Using only the",
            "example routes above, do the following:",
            f"1. Select {count} pairs of parent routes. Output each selected pair as the two",
            f"   example numbers between {SELECTION_OPEN} and {SELECTION_CLOSE}, for example",
            f"   {SELECTION_OPEN}3,7{SELECTION_CLOSE}.",
            "2. For each selected pair, combine the two parents into one new route",
            "   (crossover), then alter the new route slightly (mutation).",
            f"3. Output each new route between {RES_OPEN} and {RES_CLOSE}, for example",
            f"   {RES_OPEN}0,2,1,3{RES_CLOSE}.",
            "",
            "Rules for your output:",
            f"- Produce exactly {count} {SELECTION_OPEN} lines and exactly {count} {RES_OPEN} lines.",
            f"- Every route must contain each index from 0 to {n - 1} exactly once,",
            "  comma-separated, with no other text inside the tags.",
        ]
    )


def _opro_instructions(n: int, count: int) -> str:
    return "\n".join(
        [
            f"Propose {count} new routes that are as short as possible and different from",
            "all example routes above.",
            f"Output each new route between {RES_OPEN} and {RES_CLOSE}, for example",
            f"{RES_OPEN}0,2,1,3{RES_CLOSE}.",
            "",
            "Rules for your output:",
            f"- Produce exactly {count} {RES_OPEN} lines.",
            f"- Every route must contain each index from 0 to {n - 1} exactly once,",
            "  comma-separated, with no other text inside the tags.",
        ]
    )


def _build(instance: Instance, population: Sequence[ScoredTour], offspring_count: int, mode: str) -> PromptBundle:
    if not population:
        raise ValueError("population must be nonempty")
    if offspring_count < 1:
        raise ValueError(f"offspring_count must be at least 1, got {offspring_count}")
    sections = [_problem_section(instance), _examples_section(population)]
    if mode == "lmea":
        sections.append(_lmea_instructions(instance.n, offspring_count))
    else:
        sections.append(_opro_instructions(instance.n, offspring_count))
    return PromptBundle(
        text="\n\n".join(sections) + "\n",
        mode=mode,
        expected_offspring=offspring_count,
        instance_ref=instance.id,
        example_count=len(population),
    )


def build_lmea_prompt(instance: Instance, population: Sequence[ScoredTour], offspring_count: int) -> PromptBundle:
    """Prompt asking for parent selection, crossover, and mutation."""
    return _build(instance, population, offspring_count, "lmea")


def build_opro_prompt(instance: Instance, population: Sequence[ScoredTour], offspring_count: int) -> PromptBundle:
    """Prompt asking for new routes directly, with no operator directives."""
    return _build(instance, population, offspring_count, "opro")


def _tagged_blocks(raw: str, open_tag: str, close_tag: str) -> list[str]:
    # First closing tag after each opening tag wins; unpaired tags are ignored.
    blocks = []
    pos = 0
    while True:
        start = raw.find(open_tag, pos)
        if start < 0:
            break
        end = raw.find(close_tag, start + len(open_tag))
        if end < 0:
            break
        blocks.append(raw[start + len(open_tag):end])
        pos = end + len(close_tag)
    return blocks


def parse_response(raw: str, n: int) -> ParsedResponse:
    """Extract validated tours and advisory selections from arbitrary text."""
    offspring: list[Tour] = []
    rejected: list[tuple[str, str]] = []
    for fragment in _tagged_blocks(raw, RES_OPEN, RES_CLOSE):
        indices = parse_index_list(fragment)
        if isinstance(indices, TourViolation):
            rejected.append((fragment, str(indices)))
            continue
        tour = validate_tour(n, indices)
        if isinstance(tour, TourViolation):
            rejected.append((fragment, str(tour)))
        else:
            offspring.append(tour)

    selections: list[tuple[int, ...]] = []
    for fragment in _tagged_blocks(raw, SELECTION_OPEN, SELECTION_CLOSE):
        refs = []
        for token in fragment.replace(",", " ").split():
            if token.isdigit():
                refs.append(int(token))
        if refs:
            selections.append(tuple(refs))

    return ParsedResponse(
        selections=tuple(selections),
        offspring=tuple(offspring),
        rejected=tuple(rejected),
    )
