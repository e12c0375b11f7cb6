"""Scenario execution against a system under test, with statistical reports.

Adapters dispatch each event of a scenario in order:

  mock -- verdicts come from a fixture map (event name -> pass/fail/error);
  exec -- spawns a command with the event name as argv[1] and the event
          fields as environment entries, exit 0 means pass;
  http -- POSTs the canonical event encoding to <base_url>/events and
          checks the response status against an expected range.

A failing or erroring event marks the rest of the scenario skipped (unless
configured to continue). Reports group runs by tag and estimate the
failure probability per group with variance and a Wilson 95% interval.
"""

from __future__ import annotations

import math
import os
import subprocess
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from shutil import which

from .engine import Scenario
from .events import Event, canonical_json

Z95 = 1.959964
PASS, FAIL, ERROR, SKIPPED = "pass", "fail", "error", "skipped"


class AdapterMisconfiguredError(ValueError):
    """Adapter settings are unusable; detected before any dispatch."""


@dataclass(frozen=True)
class MockAdapter:
    """Fixed verdicts by event name; unlisted events pass."""

    verdicts: tuple[tuple[str, str], ...] = ()

    kind = "mock"

    @classmethod
    def make(cls, verdicts: dict[str, str] | None = None) -> "MockAdapter":
        return cls(tuple(sorted((verdicts or {}).items())))

    def validate(self) -> None:
        for name, verdict in self.verdicts:
            if verdict not in (PASS, FAIL, ERROR):
                raise AdapterMisconfiguredError(
                    f"mock verdict for {name!r} must be pass/fail/error, got {verdict!r}"
                )

    def dispatch(self, event: Event) -> tuple[str, str]:
        verdict = dict(self.verdicts).get(event.name, PASS)
        return verdict, f"mock fixture: {verdict}"


@dataclass(frozen=True)
class ExecAdapter:
    """Runs a command per event; fields ride in the environment."""

    command: tuple[str, ...]
    timeout: float = 10.0

    kind = "exec"

    def validate(self) -> None:
        if not self.command:
            raise AdapterMisconfiguredError("exec adapter needs a non-empty command")
        if self.timeout <= 0:
            raise AdapterMisconfiguredError("exec adapter timeout must be > 0")
        program = self.command[0]
        if which(program) is None and not Path(program).exists():
            raise AdapterMisconfiguredError(f"exec adapter command {program!r} not found")

    def dispatch(self, event: Event) -> tuple[str, str]:
        env = dict(os.environ)
        for key, value in event.fields:
            env[key] = str(value)
        try:
            result = subprocess.run(
                list(self.command) + [event.name],
                env=env,
                capture_output=True,
                timeout=self.timeout,
                check=False,
            )
        except subprocess.TimeoutExpired:
            return ERROR, f"timeout after {self.timeout}s"
        except OSError as exc:
            return ERROR, f"spawn failed: {exc}"
        if result.returncode == 0:
            return PASS, "exit 0"
        stderr = result.stderr.decode("utf-8", errors="replace").strip()
        detail = f"exit {result.returncode}"
        if stderr:
            detail += f": {stderr[:200]}"
        return FAIL, detail


@dataclass(frozen=True)
class HttpAdapter:
    """POSTs canonical event JSON to <base_url>/events."""

    base_url: str
    timeout: float = 10.0
    expected_status: tuple[int, int] = (200, 299)

    kind = "http"

    def validate(self) -> None:
        if not self.base_url.startswith(("http://", "https://")):
            raise AdapterMisconfiguredError(
                f"http adapter base_url must start with http:// or https://, got {self.base_url!r}"
            )
        if self.timeout <= 0:
            raise AdapterMisconfiguredError("http adapter timeout must be > 0")
        lo, hi = self.expected_status
        if not (100 <= lo <= hi <= 599):
            raise AdapterMisconfiguredError(f"bad expected_status range {self.expected_status}")

    def dispatch(self, event: Event) -> tuple[str, str]:
        body = canonical_json(event.to_obj()).encode("utf-8")
        request = urllib.request.Request(
            self.base_url.rstrip("/") + "/events",
            data=body,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        lo, hi = self.expected_status
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                status = response.status
        except urllib.error.HTTPError as exc:
            status = exc.code
        except (urllib.error.URLError, OSError) as exc:
            return ERROR, f"transport failure: {exc}"
        if lo <= status <= hi:
            return PASS, str(status)
        return FAIL, str(status)


Adapter = MockAdapter | ExecAdapter | HttpAdapter


@dataclass(frozen=True)
class EventOutcome:
    event: Event
    status: str
    duration_ms: float
    detail: str


@dataclass(frozen=True)
class RunResult:
    scenario: Scenario
    outcomes: tuple[EventOutcome, ...]
    overall: str  # pass | fail | error
    tags: frozenset[str] = frozenset()

    def with_tags(self, tags: set[str]) -> "RunResult":
        return RunResult(self.scenario, self.outcomes, self.overall, frozenset(tags))


def execute(
    scenario: Scenario,
    adapter: Adapter,
    tags: set[str] | None = None,
    continue_on_failure: bool = False,
) -> RunResult:
    """Dispatch the scenario's events in order; stop on first fail/error."""
    adapter.validate()
    outcomes: list[EventOutcome] = []
    overall = PASS
    failed = False
    for event in scenario.events:
        if failed and not continue_on_failure:
            outcomes.append(EventOutcome(event, SKIPPED, 0.0, "skipped after failure"))
            continue
        if adapter.kind == "mock":
            # Mock runs are pure; pin the duration so results are reproducible.
            status, detail = adapter.dispatch(event)
            duration = 0.0
        else:
            started = time.monotonic()
            status, detail = adapter.dispatch(event)
            duration = (time.monotonic() - started) * 1000.0
        outcomes.append(EventOutcome(event, status, duration, detail))
        if status in (FAIL, ERROR):
            if not failed:
                overall = status  # first failure decides the run verdict
            failed = True
    return RunResult(scenario, tuple(outcomes), overall, frozenset(tags or ()))


def execute_all(
    scenarios: list[Scenario],
    adapter: Adapter,
    tags_for: list[set[str]] | None = None,
    continue_on_failure: bool = False,
    workers: int = 1,
) -> list[RunResult]:
    """Execute scenarios, optionally in parallel; result order is input order."""
    adapter.validate()
    tag_sets = tags_for or [set() for _ in scenarios]
    if workers <= 1 or len(scenarios) <= 1:
        return [
            execute(s, adapter, tags, continue_on_failure)
            for s, tags in zip(scenarios, tag_sets)
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(execute, s, adapter, tags, continue_on_failure)
            for s, tags in zip(scenarios, tag_sets)
        ]
        return [f.result() for f in futures]


def wilson95(k: int, n: int) -> tuple[float, float]:
    """Wilson score interval for k failures out of n runs at z=1.959964."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= k <= n:
        raise ValueError("k must be in [0, n]")
    p = k / n
    z2 = Z95 * Z95
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = (Z95 / denom) * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    # At the boundaries the closed form collapses exactly; pin them so float
    # rounding cannot leave lo/hi a few ulps inside [0, 1].
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class ReportGroup:
    tag: str
    n: int
    k: int

    @property
    def p_hat(self) -> float:
        return self.k / self.n if self.n else 0.0

    @property
    def variance(self) -> float:
        return self.p_hat * (1 - self.p_hat) / self.n if self.n else 0.0

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson95(self.k, self.n) if self.n else (0.0, 0.0)


@dataclass(frozen=True)
class Report:
    groups: tuple[ReportGroup, ...]
    total: ReportGroup
    timestamp: str
    config_echo: dict = field(default_factory=dict, compare=False)


def report(results: list[RunResult], timestamp: str = "", config_echo: dict | None = None) -> Report:
    """Group results by tag; a multi-tagged run counts once per group and
    once in the totals."""
    by_tag: dict[str, list[RunResult]] = {}
    for result in results:
        for tag in result.tags:
            by_tag.setdefault(tag, []).append(result)
    groups = tuple(
        ReportGroup(tag, len(rs), sum(1 for r in rs if r.overall != PASS))
        for tag, rs in sorted(by_tag.items())
    )
    total = ReportGroup("_total", len(results), sum(1 for r in results if r.overall != PASS))
    return Report(groups, total, timestamp, dict(config_echo or {}))


def _group_obj(group: ReportGroup, record_type: str) -> dict:
    lo, hi = group.wilson if group.n else (None, None)
    obj = {
        "type": record_type,
        "tag": group.tag,
        "n": group.n,
        "k": group.k,
        "p_hat": group.p_hat,
        "variance": group.variance,
        "wilson95_lo": lo,
        "wilson95_hi": hi,
    }
    return obj


def render_report_ndjson(rep: Report) -> str:
    lines = [
        canonical_json(
            {"type": "meta", "timestamp": rep.timestamp, "config": rep.config_echo}
        )
    ]
    lines.extend(canonical_json(_group_obj(g, "group")) for g in rep.groups)
    lines.append(canonical_json(_group_obj(rep.total, "total")))
    return "\n".join(lines) + "\n"


def render_report_table(rep: Report) -> str:
    header = f"{'tag':<20} {'n':>6} {'k':>6} {'p_hat':>10} {'variance':>10} {'wilson95_lo':>12} {'wilson95_hi':>12}"
    lines = [f"generated: {rep.timestamp}", header, "-" * len(header)]

    def row(group: ReportGroup) -> str:
        if group.n:
            lo, hi = group.wilson
            return (
                f"{group.tag:<20} {group.n:>6} {group.k:>6} {group.p_hat:>10.6f} "
                f"{group.variance:>10.6f} {lo:>12.6f} {hi:>12.6f}"
            )
        return f"{group.tag:<20} {group.n:>6} {group.k:>6} {'-':>10} {'-':>10} {'-':>12} {'-':>12}"

    lines.extend(row(g) for g in rep.groups)
    lines.append(row(rep.total))
    return "\n".join(lines) + "\n"
