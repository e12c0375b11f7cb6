"""Scenario sampling, coverage computation, and ensemble construction.

Coverage identity is the canonical event label (name plus fields), so
``push(color="green")`` and ``push(color="red")`` are distinct targets.
Pair/triple targets are ordered label tuples occurring as not-necessarily
adjacent subsequences of a scenario.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .engine import Engine, Scenario
from .events import canonical_json
from .model import CheckedModel
from .rng import derive_seed
from .statespace import CyclicGraphError, RunGraph

CRITERIA = ("events", "pairs", "triples", "edges", "diversity")


class UnsupportedCriterionError(ValueError):
    def __init__(self, kind: str):
        supported = ", ".join(CRITERIA)
        super().__init__(f"unsupported criterion '{kind}'; supported: {supported}")
        self.kind = kind


@dataclass(frozen=True)
class Criterion:
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in CRITERIA:
            raise UnsupportedCriterionError(self.kind)

    @property
    def tuple_size(self) -> int | None:
        return {"pairs": 2, "triples": 3}.get(self.kind)


# Coverage targets: label str (events), tuple of labels (pairs/triples),
# or edge id int (edges).
CoverageTarget = object


@dataclass
class Ensemble:
    scenarios: list[Scenario]
    criterion: Criterion
    covered: set = field(default_factory=set)
    coverage_ratio: float | None = None
    min_distance: int | None = None  # diversity only


def sample_walk(
    model: CheckedModel,
    n: int,
    seed: int,
    max_depth: int = 10_000,
) -> list[Scenario]:
    """n independent seeded random runs; duplicates allowed, cycles fine."""
    if n < 1:
        raise ValueError("n must be positive")
    engine = Engine(model)
    return [
        engine.run(strategy="seeded-random", seed=derive_seed(seed, i), max_depth=max_depth)
        for i in range(n)
    ]


def covered(
    scenario: Scenario,
    criterion: Criterion,
    graph: RunGraph | None = None,
) -> set:
    """Targets the scenario covers under the criterion."""
    labels = scenario.labels()
    if criterion.kind == "events":
        return set(labels)
    if criterion.kind == "pairs":
        seen: set[str] = set()
        pairs: set[tuple[str, str]] = set()
        for label in labels:
            pairs.update((before, label) for before in seen)
            seen.add(label)
        return pairs
    if criterion.kind == "triples":
        seen_one: set[str] = set()
        seen_two: set[tuple[str, str]] = set()
        triples: set[tuple[str, str, str]] = set()
        for label in labels:
            triples.update((a, b, label) for (a, b) in seen_two)
            seen_two.update((a, label) for a in seen_one)
            seen_one.add(label)
        return triples
    if criterion.kind == "edges":
        if graph is None:
            raise ValueError("edges criterion requires a run graph")
        return set(graph.replay(scenario.events))
    raise UnsupportedCriterionError(criterion.kind)


def feasible_targets(graph: RunGraph, criterion: Criterion) -> set:
    """Union of covered(s) over all maximal runs, computed on the graph.

    events/edges come straight from the edge set; pairs/triples use a
    reachability DP over the DAG (exact, no enumeration needed).
    """
    if criterion.kind == "events":
        return {e.event.canonical() for e in graph.edges}
    if criterion.kind == "edges":
        return {e.id for e in graph.edges}
    if criterion.kind in ("pairs", "triples"):
        if not graph.acyclic:
            raise CyclicGraphError("exact feasible targets need an acyclic graph")
        return _feasible_tuples(graph, criterion.kind)
    if criterion.kind == "diversity":
        return set()
    raise UnsupportedCriterionError(criterion.kind)


def _feasible_tuples(graph: RunGraph, kind: str) -> set:
    # labels_after[v]: labels on edges reachable from v (along any path).
    n = len(graph.nodes)
    topo = _topological(graph)
    labels_after: list[set[str]] = [set() for _ in range(n)]
    for v in reversed(topo):
        for edge in graph.out_edges(v):
            labels_after[v].add(edge.event.canonical())
            labels_after[v].update(labels_after[edge.dst])
    if kind == "pairs":
        pairs: set[tuple[str, str]] = set()
        for edge in graph.edges:
            a = edge.event.canonical()
            pairs.update((a, b) for b in labels_after[edge.dst])
        return pairs
    labels_before: list[set[str]] = [set() for _ in range(n)]
    for v in topo:
        for edge in graph.out_edges(v):
            labels_before[edge.dst].update(labels_before[v])
            labels_before[edge.dst].add(edge.event.canonical())
    triples: set[tuple[str, str, str]] = set()
    for edge in graph.edges:
        b = edge.event.canonical()
        for a in labels_before[edge.src]:
            triples.update((a, b, c) for c in labels_after[edge.dst])
    return triples


def _topological(graph: RunGraph) -> list[int]:
    indegree = [0] * len(graph.nodes)
    for edge in graph.edges:
        indegree[edge.dst] += 1
    queue = [i for i in range(len(graph.nodes)) if indegree[i] == 0]
    order: list[int] = []
    while queue:
        u = queue.pop()
        order.append(u)
        for edge in graph.out_edges(u):
            indegree[edge.dst] -= 1
            if indegree[edge.dst] == 0:
                queue.append(edge.dst)
    if len(order) != len(graph.nodes):
        raise CyclicGraphError("graph contains a cycle")
    return order


def levenshtein(a: Sequence[str], b: Sequence[str]) -> int:
    """Edit distance between two label sequences."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, item_a in enumerate(a, start=1):
        current = [i]
        for j, item_b in enumerate(b, start=1):
            cost = 0 if item_a == item_b else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[len(b)]


def _scenario_sort_key(scenario: Scenario) -> tuple:
    return (len(scenario.events), scenario.labels())


def ensemble(
    pool: list[Scenario],
    criterion: Criterion,
    budget: int,
    graph: RunGraph | None = None,
    weights: dict[str, int] | None = None,
    feasible: set | None = None,
) -> Ensemble:
    """Greedy scenario selection under a member budget.

    Coverage kinds run greedy set cover (gain = weighted count of newly
    covered targets; ties prefer shorter then lexicographically smaller
    scenarios). Diversity runs greedy max-min edit distance seeded with the
    longest scenario. Members never repeat.
    """
    if not pool:
        raise ValueError("pool must be non-empty")
    if budget < 1:
        raise ValueError("budget must be positive")
    ordered = sorted(pool, key=_scenario_sort_key)
    deduped: list[Scenario] = []
    seen_keys: set[tuple] = set()
    for scenario in ordered:
        key = (scenario.labels(), scenario.terminal)
        if key not in seen_keys:
            seen_keys.add(key)
            deduped.append(scenario)

    if criterion.kind == "diversity":
        return _ensemble_diverse(deduped, criterion, budget)
    return _ensemble_cover(deduped, criterion, budget, graph, weights, feasible)


def _target_weight(target, kind: str, weights: dict[str, int] | None, graph: RunGraph | None) -> int:
    if not weights:
        return 1
    if kind == "events":
        return weights.get(_base_name(target), 1)
    if kind in ("pairs", "triples"):
        product = 1
        for label in target:
            product *= weights.get(_base_name(label), 1)
        return product
    if kind == "edges" and graph is not None:
        return weights.get(graph.edges[target].event.name, 1)
    return 1


def _base_name(label: str) -> str:
    return label.split("(", 1)[0]


def _ensemble_cover(
    pool: list[Scenario],
    criterion: Criterion,
    budget: int,
    graph: RunGraph | None,
    weights: dict[str, int] | None,
    feasible: set | None,
) -> Ensemble:
    covers = [covered(s, criterion, graph) for s in pool]
    if feasible is None:
        if graph is not None and graph.acyclic and not graph.truncated:
            feasible = feasible_targets(graph, criterion)
        else:
            # No exact universe available: measure against the pool's union.
            feasible = set().union(*covers) if covers else set()
    members: list[Scenario] = []
    covered_set: set = set()
    chosen: set[int] = set()
    while len(members) < budget:
        best_idx = -1
        best_gain = 0
        for i, cover in enumerate(covers):
            if i in chosen:
                continue
            new = cover - covered_set
            gain = sum(_target_weight(t, criterion.kind, weights, graph) for t in new)
            if gain > best_gain:
                best_gain = gain
                best_idx = i
        if best_idx < 0:
            break
        chosen.add(best_idx)
        members.append(pool[best_idx])
        covered_set |= covers[best_idx]
    ratio = (len(covered_set & feasible) / len(feasible)) if feasible else 1.0
    return Ensemble(members, criterion, covered_set, coverage_ratio=ratio)


def _ensemble_diverse(pool: list[Scenario], criterion: Criterion, budget: int) -> Ensemble:
    # Seed with the longest scenario; the pool is sorted, so max() lands on
    # the lexicographically smallest among equal lengths.
    longest = max(pool, key=lambda s: len(s.events))
    members = [longest]
    remaining = [s for s in pool if s is not longest]
    min_dists = [levenshtein(s.labels(), longest.labels()) for s in remaining]
    while remaining and len(members) < budget:
        best = max(range(len(remaining)), key=lambda i: min_dists[i])
        chosen = remaining.pop(best)
        min_dists.pop(best)
        members.append(chosen)
        for i, s in enumerate(remaining):
            d = levenshtein(s.labels(), chosen.labels())
            if d < min_dists[i]:
                min_dists[i] = d
    overall_min = None
    if len(members) > 1:
        overall_min = min(
            levenshtein(a.labels(), b.labels())
            for i, a in enumerate(members)
            for b in members[i + 1 :]
        )
    return Ensemble(members, criterion, set(), coverage_ratio=None, min_distance=overall_min)


# -- scenario files -----------------------------------------------------------


def dump_scenarios(scenarios: Iterable[Scenario]) -> str:
    """Newline-delimited canonical records; byte-stable for identical input."""
    return "".join(canonical_json(s.to_obj()) + "\n" for s in scenarios)


def write_scenarios(path: str | Path, scenarios: Iterable[Scenario]) -> None:
    Path(path).write_text(dump_scenarios(scenarios), encoding="utf-8", newline="\n")


def load_scenarios(path: str | Path) -> list[Scenario]:
    scenarios = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            scenarios.append(Scenario.from_obj(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{line_no}: bad scenario record: {exc}") from exc
    return scenarios
