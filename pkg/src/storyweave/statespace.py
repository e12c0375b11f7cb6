"""Configuration-graph exploration and run-set analytics.

Explores the model's configuration space breadth-first with deduplication,
then counts, enumerates, or uniformly samples the maximal runs. Node ids
are BFS discovery indices with canonical edge ordering, so graphs (and
everything exported from them) are stable across processes and platforms.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .engine import Configuration, Engine, Scenario
from .events import Event
from .model import CheckedModel
from .rng import Pcg32


class CyclicGraphError(ValueError):
    """Run counting/enumeration needs an acyclic graph."""


class TruncatedGraphError(ValueError):
    """Run counting/enumeration needs a graph without truncated nodes."""


class ReplayMismatchError(ValueError):
    """A scenario is not a root path of the graph."""


class BudgetExceededError(RuntimeError):
    """Node budget hit; the partial graph rides on the exception."""

    def __init__(self, graph: "RunGraph"):
        super().__init__(f"node budget exceeded ({len(graph.nodes)} nodes explored)")
        self.graph = graph


@dataclass(frozen=True)
class GraphNode:
    """A configuration summary.

    A node with no out-edges is either terminal (quiescent: nothing left
    requested -- a completed test scenario), deadlocked (some event is
    still requested but every request is blocked -- a modeling smell, not
    a test), or truncated by a depth/node budget.
    """

    id: int
    depth: int
    terminal: bool
    truncated: bool
    deadlock: bool = False
    config_hash: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class GraphEdge:
    id: int
    src: int
    event: Event
    dst: int


@dataclass
class RunGraph:
    nodes: list[GraphNode]
    edges: list[GraphEdge]
    root: int
    acyclic: bool
    depth_bound: int | None = None
    cycle_witness: int | None = None  # edge id of one back/self edge

    def __post_init__(self) -> None:
        self._out: list[list[int]] = [[] for _ in self.nodes]
        for edge in self.edges:
            self._out[edge.src].append(edge.id)

    def out_edges(self, node_id: int) -> list[GraphEdge]:
        return [self.edges[i] for i in self._out[node_id]]

    @property
    def truncated(self) -> bool:
        return any(n.truncated for n in self.nodes)

    @property
    def deadlock_nodes(self) -> list[GraphNode]:
        return [n for n in self.nodes if n.deadlock]

    def replay(self, events: tuple[Event, ...]) -> list[int]:
        """Edge ids along the root path spelled by the event sequence."""
        node = self.root
        path: list[int] = []
        for i, event in enumerate(events):
            for edge in self.out_edges(node):
                if edge.event == event:
                    path.append(edge.id)
                    node = edge.dst
                    break
            else:
                raise ReplayMismatchError(
                    f"event #{i + 1} {event.canonical()} has no edge from node {node}"
                )
        return path


def explore(
    model: CheckedModel,
    max_depth: int | None = None,
    max_nodes: int | None = None,
) -> RunGraph:
    """Breadth-first exploration with canonical-hash deduplication.

    Depth-capped nodes are kept and flagged truncated rather than dropped.
    When max_nodes is hit the budget check runs between node expansions, so
    every expanded node keeps its full out-edge set; the partial graph is
    attached to BudgetExceededError.
    """
    engine = Engine(model)

    def classify_leaf(config: Configuration) -> tuple[bool, bool]:
        """(terminal, deadlock) for a configuration with nothing enabled."""
        pending = any(s.requested for s in engine.sync_snapshot(config))
        return (not pending, pending)

    root = engine.init()
    configs: list[Configuration] = [root]
    ids: dict[str, int] = {root.encode(): 0}
    depths = [0]
    terminal = [False]
    truncated = [False]
    deadlock = [False]
    edges: list[GraphEdge] = []
    queue: deque[int] = deque([0])
    budget_hit = False

    while queue:
        if max_nodes is not None and len(configs) > max_nodes:
            budget_hit = True
            break
        u = queue.popleft()
        config = configs[u]
        enabled = engine.enabled(config)
        if not enabled:
            terminal[u], deadlock[u] = classify_leaf(config)
            continue
        if max_depth is not None and depths[u] >= max_depth:
            truncated[u] = True
            continue
        for event in enabled:
            succ = engine.step_enabled(config, event)
            key = succ.encode()
            v = ids.get(key)
            if v is None:
                v = len(configs)
                ids[key] = v
                configs.append(succ)
                depths.append(depths[u] + 1)
                terminal.append(False)
                truncated.append(False)
                deadlock.append(False)
                queue.append(v)
            edges.append(GraphEdge(len(edges), u, event, v))

    if budget_hit:
        for v in queue:
            if engine.enabled(configs[v]):
                truncated[v] = True
            else:
                terminal[v], deadlock[v] = classify_leaf(configs[v])

    out: list[list[int]] = [[] for _ in configs]
    for edge in edges:
        out[edge.src].append(edge.id)
    acyclic, witness = _check_acyclic(len(configs), edges, out)

    nodes = [
        GraphNode(
            i, depths[i], terminal[i], truncated[i], deadlock[i], configs[i].canonical_hash()
        )
        for i in range(len(configs))
    ]
    graph = RunGraph(nodes, edges, 0, acyclic, max_depth, witness)
    if budget_hit:
        raise BudgetExceededError(graph)
    return graph


def _check_acyclic(
    n: int, edges: list[GraphEdge], out: list[list[int]]
) -> tuple[bool, int | None]:
    WHITE, GREY, BLACK = 0, 1, 2
    color = [WHITE] * n
    for start in range(n):
        if color[start] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        color[start] = GREY
        while stack:
            node, i = stack[-1]
            if i < len(out[node]):
                stack[-1] = (node, i + 1)
                edge = edges[out[node][i]]
                if color[edge.dst] == GREY:
                    return False, edge.id
                if color[edge.dst] == WHITE:
                    color[edge.dst] = GREY
                    stack.append((edge.dst, 0))
            else:
                color[node] = BLACK
                stack.pop()
    return True, None


def _require_countable(graph: RunGraph) -> None:
    if not graph.acyclic:
        raise CyclicGraphError("graph contains a cycle; the run set is infinite")
    if graph.truncated:
        raise TruncatedGraphError("graph was depth/budget truncated; counts would be partial")


def path_counts(graph: RunGraph) -> list[int]:
    """Maximal-path count from each node (arbitrary precision)."""
    _require_countable(graph)
    order = _reverse_topological(graph)
    counts = [0] * len(graph.nodes)
    for node_id in order:
        node = graph.nodes[node_id]
        out = graph.out_edges(node_id)
        if not out:
            counts[node_id] = 1 if node.terminal else 0
        else:
            counts[node_id] = sum(counts[e.dst] for e in out)
    return counts


def _reverse_topological(graph: RunGraph) -> list[int]:
    indegree = [0] * len(graph.nodes)
    for edge in graph.edges:
        indegree[edge.dst] += 1
    queue = deque(i for i in range(len(graph.nodes)) if indegree[i] == 0)
    order: list[int] = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for edge in graph.out_edges(u):
            indegree[edge.dst] -= 1
            if indegree[edge.dst] == 0:
                queue.append(edge.dst)
    order.reverse()
    return order


def count_runs(graph: RunGraph) -> int:
    """Number of distinct maximal root-to-terminal paths.

    Paths ending in a deadlocked configuration (a request pending but
    blocked forever) are not test scenarios and are excluded.
    """
    return path_counts(graph)[graph.root]


def enumerate_runs(graph: RunGraph, limit: int | None = None) -> list[Scenario]:
    """All maximal runs in lexicographic (canonical edge order) DFS order."""
    _require_countable(graph)
    results: list[Scenario] = []
    # Iterative DFS: stack of (node, next-edge-index); prefix holds events.
    stack: list[tuple[int, int]] = [(graph.root, 0)]
    prefix: list[Event] = []
    while stack:
        if limit is not None and len(results) >= limit:
            break
        node, i = stack[-1]
        out = graph.out_edges(node)
        if not out and i == 0:
            if graph.nodes[node].terminal:
                results.append(Scenario(tuple(prefix), "completed"))
            stack.pop()
            if prefix:
                prefix.pop()
            continue
        if i < len(out):
            stack[-1] = (node, i + 1)
            edge = out[i]
            prefix.append(edge.event)
            stack.append((edge.dst, 0))
        else:
            stack.pop()
            if prefix:
                prefix.pop()
    return results


def uniform_sample(graph: RunGraph, n: int, seed: int) -> list[Scenario]:
    """n i.i.d. uniform draws over all maximal runs.

    Each walk picks an out-edge with probability count(dst)/count(node),
    which makes every maximal path equally likely.
    """
    if n < 1:
        raise ValueError("n must be positive")
    counts = path_counts(graph)
    if counts[graph.root] == 0:
        raise ValueError("graph has no maximal runs to sample")
    rng = Pcg32(seed)
    samples: list[Scenario] = []
    for _ in range(n):
        node = graph.root
        events: list[Event] = []
        while True:
            out = graph.out_edges(node)
            if not out:
                break
            r = rng.next_below(counts[node])
            acc = 0
            for edge in out:
                acc += counts[edge.dst]
                if r < acc:
                    events.append(edge.event)
                    node = edge.dst
                    break
        samples.append(Scenario(tuple(events), "completed"))
    return samples
