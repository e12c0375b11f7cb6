"""Run-graph serialization: dot text, canonical JSON, and PDF rendering.

All exports are byte-deterministic for a given (graph, highlight): nodes
and edges emit in discovery order and the JSON encoder is canonical.
PDF generation shells out to an external dot renderer (graphviz).
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .engine import Scenario
from .events import Event, canonical_json
from .statespace import GraphEdge, GraphNode, ReplayMismatchError, RunGraph

HIGHLIGHT_COLOR = "crimson"


class RendererNotFoundError(RuntimeError):
    """The external dot renderer is missing from the search path."""


class RendererFailedError(RuntimeError):
    def __init__(self, message: str, stderr: str):
        super().__init__(message)
        self.stderr = stderr


@dataclass
class Highlight:
    """Scenario set resolved to the graph edges their replays traverse."""

    edge_ids: set[int] = field(default_factory=set)
    unresolved: list[tuple[int, str]] = field(default_factory=list)  # (scenario idx, reason)

    @classmethod
    def from_scenarios(cls, graph: RunGraph, scenarios: list[Scenario]) -> "Highlight":
        highlight = cls()
        for i, scenario in enumerate(scenarios):
            try:
                highlight.edge_ids.update(graph.replay(scenario.events))
            except ReplayMismatchError as exc:
                highlight.unresolved.append((i, str(exc)))
        return highlight


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_graph_description(graph: RunGraph, highlight: Highlight | None = None) -> str:
    """Dot-language digraph.

    Terminal nodes are double-circled, depth-truncated frontier nodes are
    dashed, deadlocked nodes (blocked pending requests) are drawn red.
    """
    highlighted = highlight.edge_ids if highlight else set()
    lines = ["digraph runs {", "  rankdir=LR;", "  node [shape=circle];"]
    for node in graph.nodes:
        attrs = [f"label={_quote(str(node.id))}"]
        if node.terminal:
            attrs.append("shape=doublecircle")
        if node.truncated:
            attrs.append("style=dashed")
        if node.deadlock:
            attrs.append('color="red"')
        lines.append(f"  n{node.id} [{', '.join(attrs)}];")
    for edge in graph.edges:
        attrs = [f"label={_quote(edge.event.canonical())}"]
        if edge.id in highlighted:
            attrs.append("penwidth=3")
            attrs.append(f"color={_quote(HIGHLIGHT_COLOR)}")
        lines.append(f"  n{edge.src} -> n{edge.dst} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_structured(graph: RunGraph, highlight: Highlight | None = None) -> str:
    """Canonical JSON object; round-trips losslessly through import_structured."""
    highlighted = highlight.edge_ids if highlight else set()
    obj = {
        "nodes": [
            {
                "id": n.id,
                "terminal": n.terminal,
                "truncated": n.truncated,
                "deadlock": n.deadlock,
                "depth": n.depth,
            }
            for n in graph.nodes
        ],
        "edges": [
            {
                "from": e.src,
                "event": e.event.to_obj(),
                "to": e.dst,
                "highlighted": e.id in highlighted,
            }
            for e in graph.edges
        ],
        "root": graph.root,
        "acyclic": graph.acyclic,
    }
    return canonical_json(obj) + "\n"


def import_structured(text: str) -> tuple[RunGraph, Highlight]:
    """Inverse of to_structured; configuration hashes are not persisted."""
    obj = json.loads(text)
    nodes = [
        GraphNode(n["id"], n["depth"], n["terminal"], n["truncated"], n.get("deadlock", False))
        for n in obj["nodes"]
    ]
    edges = []
    highlight = Highlight()
    for i, e in enumerate(obj["edges"]):
        edges.append(GraphEdge(i, e["from"], Event.from_obj(e["event"]), e["to"]))
        if e.get("highlighted"):
            highlight.edge_ids.add(i)
    graph = RunGraph(nodes, edges, obj["root"], obj["acyclic"])
    return graph, highlight


def render_pdf(graph_description: str, output_path: str | Path, renderer: str = "dot") -> None:
    """Render dot text to PDF via the configured external renderer.

    Raises RendererNotFoundError when the executable is absent (the message
    names the 'renderer' config key) and RendererFailedError with captured
    stderr when it exits nonzero.
    """
    output_path = Path(output_path)
    try:
        result = subprocess.run(
            [renderer, "-Tpdf", "-o", str(output_path)],
            input=graph_description.encode("utf-8"),
            capture_output=True,
            check=False,
        )
    except FileNotFoundError:
        raise RendererNotFoundError(
            f"renderer executable {renderer!r} not found; set the 'renderer' key "
            "in config.toml or install graphviz"
        ) from None
    if result.returncode != 0:
        stderr = result.stderr.decode("utf-8", errors="replace")
        raise RendererFailedError(
            f"renderer {renderer!r} exited with status {result.returncode}", stderr
        )
