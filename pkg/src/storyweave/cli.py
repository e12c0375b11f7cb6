"""Command-line interface.

Commands: check, count, sample, ensemble, analyze, run. A project is a
directory of .story files plus an optional config.toml.

Exit codes are a contract:
  0  success
  1  executed scenarios failed or errored
  2  DSL diagnostics, unreadable inputs, or bad config
  3  --uniform sampling on a cyclic model
  4  unsupported ensemble criterion
  5  PDF renderer not found
  6  adapter misconfigured
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ProjectConfig, load_config
from .dsl import DiagnosticsError, load_project
from .engine import Engine, NotEnabledError, Scenario
from .export import (
    Highlight,
    RendererFailedError,
    RendererNotFoundError,
    render_pdf,
    to_graph_description,
    to_structured,
)
from .model import CheckedModel
from .runner import AdapterMisconfiguredError, execute_all
from .runner import report as build_report
from .runner import render_report_ndjson, render_report_table
from .scenarios import (
    CRITERIA,
    Criterion,
    UnsupportedCriterionError,
    ensemble,
    load_scenarios,
    sample_walk,
    write_scenarios,
)
from .statespace import RunGraph, count_runs, enumerate_runs, explore, uniform_sample

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_DSL = 2
EXIT_CYCLIC = 3
EXIT_CRITERION = 4
EXIT_RENDERER = 5
EXIT_ADAPTER = 6


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path: str) -> tuple[CheckedModel, ProjectConfig]:
    try:
        config = load_config(path)
        model = load_project(path)
    except DiagnosticsError as exc:
        lines = "\n".join(d.render() for d in exc.diagnostics)
        raise _CliError(EXIT_DSL, lines) from exc
    except (FileNotFoundError, NotADirectoryError, ConfigError) as exc:
        raise _CliError(EXIT_DSL, str(exc)) from exc
    for diag in model.warnings:
        print(diag.render(), file=sys.stderr)
    return model, config


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _explore(model: CheckedModel, max_depth: int | None) -> RunGraph:
    return explore(model, max_depth=max_depth)


def cmd_check(args: argparse.Namespace) -> int:
    model, _ = _load(args.project)
    events = sorted(model.vocabulary)
    print(f"ok: {len(model.stories)} stories, {len(events)} event names")
    for story in model.stories:
        print(f"  story {story.name}")
    return EXIT_OK


def cmd_count(args: argparse.Namespace) -> int:
    model, _ = _load(args.project)
    graph = _explore(model, args.max_depth)
    if not graph.acyclic:
        witness = ""
        if graph.cycle_witness is not None:
            edge = graph.edges[graph.cycle_witness]
            witness = f" (cycle via {edge.event.canonical()} at node {edge.src})"
        print(f"cyclic: {len(graph.nodes)} nodes, {len(graph.edges)} edges{witness}")
        return EXIT_OK
    if graph.truncated:
        print(
            f"truncated at depth {args.max_depth}: "
            f"{len(graph.nodes)} nodes, {len(graph.edges)} edges"
        )
        return EXIT_OK
    deadlocks = graph.deadlock_nodes
    if deadlocks:
        print(
            f"note: {len(deadlocks)} deadlocked states excluded "
            "(requests pending but permanently blocked)",
            file=sys.stderr,
        )
    print(count_runs(graph))
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    model, config = _load(args.project)
    seed = args.seed if args.seed is not None else config.seed
    max_depth = args.max_depth if args.max_depth is not None else config.max_depth
    out = Path(args.output) if args.output else Path(args.project) / "samples.ndjson"
    if args.uniform:
        graph = _explore(model, None)
        if not graph.acyclic:
            message = "model graph is cyclic; uniform sampling needs an acyclic graph (drop --uniform to walk-sample)"
            if graph.cycle_witness is not None:
                edge = graph.edges[graph.cycle_witness]
                message += f"\ncycle witness: node {edge.src} -> node {edge.dst} via {edge.event.canonical()}"
            raise _CliError(EXIT_CYCLIC, message)
        samples = uniform_sample(graph, args.num, seed)
    else:
        samples = sample_walk(model, args.num, seed, max_depth)
    write_scenarios(out, samples)
    print(f"wrote {len(samples)} scenarios to {out}")
    return EXIT_OK


def _build_pool(model: CheckedModel, config: ProjectConfig, seed: int) -> tuple[list[Scenario], RunGraph | None]:
    """Exact enumeration when affordable, seeded walks otherwise."""
    graph = _explore(model, None)
    if graph.acyclic and not graph.truncated:
        total = count_runs(graph)
        if total <= config.ensemble_pool_max_exact:
            return enumerate_runs(graph), graph
    pool = sample_walk(model, config.ensemble_pool_sample_size, seed, config.max_depth)
    return pool, graph


def cmd_ensemble(args: argparse.Namespace) -> int:
    try:
        criterion = Criterion(args.criterion)
    except UnsupportedCriterionError as exc:
        raise _CliError(EXIT_CRITERION, str(exc)) from exc
    model, config = _load(args.project)
    seed = args.seed if args.seed is not None else config.seed
    pool, graph = _build_pool(model, config, seed)
    result = ensemble(pool, criterion, args.budget, graph=graph, weights=config.weights)
    out = Path(args.output) if args.output else Path(args.project) / "ensemble.ndjson"
    write_scenarios(out, result.scenarios)
    if criterion.kind == "diversity":
        distance = result.min_distance if result.min_distance is not None else "n/a"
        print(f"members: {len(result.scenarios)}; min pairwise distance: {distance}")
    else:
        print(f"members: {len(result.scenarios)}; coverage ratio: {result.coverage_ratio:.6f}")
    print(f"wrote ensemble to {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    model, config = _load(args.project)
    graph = _explore(model, args.max_depth)
    highlight = None
    if args.highlight:
        try:
            scenarios = load_scenarios(args.highlight)
        except (OSError, ValueError) as exc:
            raise _CliError(EXIT_DSL, f"cannot read highlight file: {exc}") from exc
        highlight = Highlight.from_scenarios(graph, scenarios)
        for index, reason in highlight.unresolved:
            print(f"highlight scenario #{index + 1} does not replay: {reason}", file=sys.stderr)
    suffix = {"gv": ".gv", "json": ".json", "pdf": ".pdf"}[args.format]
    out = Path(args.output) if args.output else Path(args.project) / f"model{suffix}"
    if args.format == "json":
        _write_text(out, to_structured(graph, highlight))
    elif args.format == "gv":
        _write_text(out, to_graph_description(graph, highlight))
    else:
        description = to_graph_description(graph, highlight)
        try:
            render_pdf(description, out, renderer=config.renderer)
        except RendererNotFoundError as exc:
            raise _CliError(EXIT_RENDERER, str(exc)) from exc
        except RendererFailedError as exc:
            raise _CliError(EXIT_RENDERER, f"{exc}\n{exc.stderr}") from exc
    print(f"wrote {out}")
    return EXIT_OK


def _scenario_tags(engine: Engine, scenario: Scenario, user_tags: tuple[str, ...]) -> set[str]:
    tags = set(user_tags)
    try:
        tags |= engine.contributing_stories(scenario)
    except NotEnabledError:
        pass  # externally authored scenario; only user tags apply
    return tags


def cmd_run(args: argparse.Namespace) -> int:
    model, config = _load(args.project)
    seed = args.seed if args.seed is not None else config.seed
    if args.input:
        try:
            scenarios = load_scenarios(args.input)
        except (OSError, ValueError) as exc:
            raise _CliError(EXIT_DSL, f"cannot read scenario file: {exc}") from exc
    else:
        scenarios = sample_walk(model, args.sample, seed, config.max_depth)
    try:
        adapter = config.build_adapter(args.adapter)
    except AdapterMisconfiguredError as exc:
        raise _CliError(EXIT_ADAPTER, str(exc)) from exc
    engine = Engine(model)
    tag_sets = [_scenario_tags(engine, s, config.tags) for s in scenarios]
    results = execute_all(
        scenarios,
        adapter,
        tags_for=tag_sets,
        continue_on_failure=config.continue_on_failure,
        workers=config.workers,
    )
    timestamp = args.timestamp or os.environ.get("SOURCE_DATE_EPOCH", "")
    if not timestamp:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    rep = build_report(results, timestamp=timestamp, config_echo=config.echo())
    base = Path(args.output) if args.output else Path(args.project) / "report"
    _write_text(Path(str(base) + ".ndjson"), render_report_ndjson(rep))
    _write_text(Path(str(base) + ".txt"), render_report_table(rep))
    print(render_report_table(rep), end="")
    failed = sum(1 for r in results if r.overall != "pass")
    if failed:
        print(f"{failed} of {len(results)} scenarios failed", file=sys.stderr)
        return EXIT_RUN_FAILED
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storyweave",
        description="Weave declarative test stories into a scenario model; "
        "count, sample, ensemble, visualize, and execute the scenarios.",
    )
    parser.add_argument("--version", action="version", version=f"storyweave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and validate a project")
    p_check.add_argument("project", help="project directory containing .story files")
    p_check.set_defaults(func=cmd_check)

    p_count = sub.add_parser("count", help="count the model's maximal runs")
    p_count.add_argument("project")
    p_count.add_argument("--max-depth", type=int, default=None, help="truncate exploration at this depth")
    p_count.set_defaults(func=cmd_count)

    p_sample = sub.add_parser("sample", help="sample scenarios to samples.ndjson")
    p_sample.add_argument("project")
    p_sample.add_argument("-n", "--num", type=int, required=True, help="number of scenarios to sample")
    p_sample.add_argument("--seed", type=int, default=None, help="random seed (default from config)")
    p_sample.add_argument(
        "--uniform",
        action="store_true",
        help="sample uniformly over all maximal runs (needs an acyclic model)",
    )
    p_sample.add_argument("--max-depth", type=int, default=None, help="walk depth cap")
    p_sample.add_argument("-o", "--output", default=None, help="output file override")
    p_sample.set_defaults(func=cmd_sample)

    p_ensemble = sub.add_parser("ensemble", help="build a covering/diverse scenario ensemble")
    p_ensemble.add_argument("project")
    p_ensemble.add_argument(
        "-c",
        "--criterion",
        required=True,
        help=f"selection criterion: one of {', '.join(CRITERIA)}",
    )
    p_ensemble.add_argument("--budget", type=int, default=10, help="maximum ensemble size")
    p_ensemble.add_argument("--seed", type=int, default=None, help="random seed for walk pools")
    p_ensemble.add_argument("-o", "--output", default=None, help="output file override")
    p_ensemble.set_defaults(func=cmd_ensemble)

    p_analyze = sub.add_parser("analyze", help="export the run graph (gv, json, or pdf)")
    p_analyze.add_argument("project")
    p_analyze.add_argument("-f", "--format", choices=("gv", "json", "pdf"), default="gv")
    p_analyze.add_argument("--highlight", default=None, help="scenario file whose runs get highlighted")
    p_analyze.add_argument("--max-depth", type=int, default=None, help="truncate the graph at this depth")
    p_analyze.add_argument("-o", "--output", default=None, help="output file override")
    p_analyze.set_defaults(func=cmd_analyze)

    p_run = sub.add_parser("run", help="execute scenarios and write reports")
    p_run.add_argument("project")
    group = p_run.add_mutually_exclusive_group()
    group.add_argument("--input", default=None, help="scenario file to execute")
    group.add_argument("--sample", type=int, default=5, help="sample this many scenarios to execute")
    p_run.add_argument("--adapter", default=None, help="adapter override: mock, exec, or http")
    p_run.add_argument("--seed", type=int, default=None, help="random seed for sampling")
    p_run.add_argument("--timestamp", default=None, help="fixed report timestamp (for reproducible output)")
    p_run.add_argument("-o", "--output", default=None, help="report base path override")
    p_run.set_defaults(func=cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
