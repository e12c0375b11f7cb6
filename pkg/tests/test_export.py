"""Graph serialization: dot text, JSON round-trips, PDF renderer protocol."""

import re
import shutil
import stat

import pytest

from storyweave import compile_text
from storyweave.export import (
    Highlight,
    RendererFailedError,
    RendererNotFoundError,
    import_structured,
    render_pdf,
    to_graph_description,
    to_structured,
)
from storyweave.statespace import enumerate_runs, explore


class TestDot:
    def test_two_node_graph(self):
        graph = explore(compile_text('story "s" { request a }'))
        text = to_graph_description(graph)
        assert text.startswith("digraph runs {")
        assert text.count(" -> ") == 1
        assert 'label="a"' in text
        assert "shape=doublecircle" in text  # terminal node
        node_lines = [
            l for l in text.splitlines() if re.match(r"\s*n\d+ \[", l) and "->" not in l
        ]
        assert len(node_lines) == 2

    def test_empty_model_graph(self):
        graph = explore(compile_text(""))
        text = to_graph_description(graph)
        assert text.count(" -> ") == 0
        assert "n0" in text

    def test_highlight_marks_exactly_run_edges(self, constrained_model):
        graph = explore(constrained_model)
        run = enumerate_runs(graph, limit=1)[0]
        assert len(run.events) == 13
        highlight = Highlight.from_scenarios(graph, [run])
        text = to_graph_description(graph, highlight)
        assert text.count("penwidth=3") == 13
        assert text.count('color="crimson"') == 13

    def test_truncated_nodes_dashed(self, buttons_model):
        graph = explore(buttons_model, max_depth=2)
        text = to_graph_description(graph)
        dashed = sum(1 for l in text.splitlines() if "style=dashed" in l)
        assert dashed == sum(1 for n in graph.nodes if n.truncated)
        assert dashed > 0

    def test_deadlock_nodes_marked(self):
        model = compile_text('story "a" { request x }\nstory "b" { block x until y }')
        graph = explore(model)
        text = to_graph_description(graph)
        assert 'color="red"' in text

    def test_byte_determinism(self, constrained_model):
        a = to_graph_description(explore(constrained_model))
        b = to_graph_description(explore(constrained_model))
        assert a == b

    def test_label_quoting(self):
        graph = explore(compile_text('story "s" { request a(k: "x\\"y") }'))
        text = to_graph_description(graph)
        assert '\\"' in text


class TestStructured:
    def test_round_trip_bytes(self, constrained_model):
        graph = explore(constrained_model)
        runs = enumerate_runs(graph, limit=2)
        highlight = Highlight.from_scenarios(graph, runs)
        once = to_structured(graph, highlight)
        imported, imported_highlight = import_structured(once)
        again = to_structured(imported, imported_highlight)
        assert once == again

    def test_buttons_model_44_nodes(self, buttons_model):
        import json

        obj = json.loads(to_structured(explore(buttons_model)))
        assert len(obj["nodes"]) == 44
        assert obj["acyclic"] is True
        assert obj["root"] == 0

    def test_import_is_isomorphic(self, sessions3_model):
        graph = explore(sessions3_model)
        imported, _ = import_structured(to_structured(graph))
        assert [n.id for n in imported.nodes] == [n.id for n in graph.nodes]
        assert [(n.terminal, n.truncated, n.depth) for n in imported.nodes] == [
            (n.terminal, n.truncated, n.depth) for n in graph.nodes
        ]
        assert [(e.src, e.event, e.dst) for e in imported.edges] == [
            (e.src, e.event, e.dst) for e in graph.edges
        ]
        assert imported.acyclic == graph.acyclic

    def test_unresolvable_highlight_reported(self, buttons_model):
        from storyweave.engine import Scenario
        from storyweave.events import Event

        graph = explore(buttons_model)
        bogus = Scenario((Event.make("zap"),))
        highlight = Highlight.from_scenarios(graph, [bogus])
        assert highlight.edge_ids == set()
        assert len(highlight.unresolved) == 1
        assert "zap" in highlight.unresolved[0][1]


FAKE_RENDERER = """\
#!/bin/sh
# minimal dot-like tool: writes a file for well-formed input, else fails
out=""
while [ $# -gt 0 ]; do
  case "$1" in
    -o) out="$2"; shift 2 ;;
    *) shift ;;
  esac
done
input=$(cat)
case "$input" in
  digraph*) printf '%%PDF-stub %s' "$input" > "$out"; exit 0 ;;
  *) echo "fake-renderer: bad input" >&2; exit 3 ;;
esac
"""


@pytest.fixture
def fake_renderer(tmp_path):
    path = tmp_path / "fakedot"
    path.write_text(FAKE_RENDERER, encoding="utf-8")
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


class TestRenderPdf:
    def test_renderer_missing(self, tmp_path):
        with pytest.raises(RendererNotFoundError, match="renderer"):
            render_pdf("digraph {}\n", tmp_path / "out.pdf", renderer="no-such-renderer-xyz")

    def test_renderer_success(self, tmp_path, fake_renderer):
        graph = explore(compile_text('story "s" { request a }'))
        out = tmp_path / "model.pdf"
        render_pdf(to_graph_description(graph), out, renderer=fake_renderer)
        assert out.exists() and out.stat().st_size > 0

    def test_renderer_failure_captures_stderr(self, tmp_path, fake_renderer):
        with pytest.raises(RendererFailedError) as exc:
            render_pdf("not a graph", tmp_path / "out.pdf", renderer=fake_renderer)
        assert "bad input" in exc.value.stderr

    @pytest.mark.skipif(shutil.which("dot") is None, reason="graphviz not installed")
    def test_real_dot(self, tmp_path):
        graph = explore(compile_text('story "s" { request a }'))
        out = tmp_path / "model.pdf"
        render_pdf(to_graph_description(graph), out, renderer="dot")
        assert out.stat().st_size > 0
