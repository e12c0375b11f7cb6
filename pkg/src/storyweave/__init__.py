"""storyweave: scenario-driven model-based testing.

Write small declarative stories; the engine weaves them, via synchronized
request/wait/block semantics, into a model of every legal test scenario,
then counts, samples, ensembles, visualizes, and executes those scenarios.
"""

__version__ = "0.1.0"

from .dsl import (
    CheckError,
    Diagnostic,
    DiagnosticsError,
    ParseError,
    SourceFile,
    check,
    compile_text,
    expand_refinements,
    load_project,
    parse,
    parse_text,
    pretty_print,
)
from .engine import (
    Configuration,
    Engine,
    NotEnabledError,
    Scenario,
    SyncStatement,
    ThreadState,
    init,
    run,
)
from .events import Event, EventPattern
from .model import CheckedModel, CheckedStory
from .scenarios import (
    Criterion,
    Ensemble,
    UnsupportedCriterionError,
    covered,
    ensemble,
    feasible_targets,
    load_scenarios,
    sample_walk,
    write_scenarios,
)
from .statespace import (
    BudgetExceededError,
    CyclicGraphError,
    RunGraph,
    TruncatedGraphError,
    count_runs,
    enumerate_runs,
    explore,
    uniform_sample,
)

__all__ = [
    "BudgetExceededError",
    "CheckError",
    "CheckedModel",
    "CheckedStory",
    "Configuration",
    "Criterion",
    "CyclicGraphError",
    "Diagnostic",
    "DiagnosticsError",
    "Engine",
    "Ensemble",
    "Event",
    "EventPattern",
    "NotEnabledError",
    "ParseError",
    "RunGraph",
    "Scenario",
    "SourceFile",
    "SyncStatement",
    "ThreadState",
    "TruncatedGraphError",
    "UnsupportedCriterionError",
    "check",
    "compile_text",
    "count_runs",
    "covered",
    "ensemble",
    "enumerate_runs",
    "expand_refinements",
    "explore",
    "feasible_targets",
    "init",
    "load_project",
    "load_scenarios",
    "parse",
    "parse_text",
    "pretty_print",
    "run",
    "sample_walk",
    "uniform_sample",
    "write_scenarios",
]
