"""Acceptance suite: the project's exit criteria.

Each criterion is one test named test_criterion_NN_*, so `pytest -v
tests/test_acceptance.py` prints one pass/fail line per criterion. Run
times for the timed criteria are asserted inside the tests themselves.
"""

import hashlib
import json
import random
import re
import time

import scipy.stats

from conftest import (
    BUTTONS_CONSTRAINED_SRC,
    BUTTONS_SRC,
    make_project,
    two_session_src,
)
from oracles import interleavings, naive_runs, wilson_closed_form
from storyweave import compile_text
from storyweave.cli import main
from storyweave.dsl import CheckError, ParseError, check, parse_text
from storyweave.export import import_structured, to_structured
from storyweave.runner import wilson95
from storyweave.scenarios import Criterion, covered, ensemble, feasible_targets
from storyweave.statespace import count_runs, enumerate_runs, explore, uniform_sample


def sha(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_criterion_01_unconstrained_interleaving_count(tmp_path, capsys):
    started = time.perf_counter()
    proj = make_project(tmp_path / "p1", BUTTONS_SRC)
    assert main(["count", str(proj)]) == 0
    assert capsys.readouterr().out.strip() == "286"
    # independent brute-force interleaver over the two button sequences
    brute = interleavings(("g",) * 3, ("r",) * 10)
    assert len(brute) == 286
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_criterion_02_blocking_constraint_count(tmp_path, capsys):
    started = time.perf_counter()
    proj = make_project(tmp_path / "p2", BUTTONS_CONSTRAINED_SRC)
    assert main(["count", str(proj)]) == 0
    assert capsys.readouterr().out.strip() == "165"
    # every enumerated run passes the adjacency regex check
    graph = explore(compile_text(BUTTONS_CONSTRAINED_SRC))
    runs = enumerate_runs(graph)
    assert len(runs) == 165
    for run in runs:
        letters = "".join(
            "g" if e.field_map.get("color") == "green" else "r" for e in run.events
        )
        assert len(letters) == 13
        assert not re.search("gg", letters)
    # cross-check against the engine-free interleaver restricted to legal runs
    brute = {s for s in interleavings(("g",) * 3, ("r",) * 10) if "gg" not in "".join(s)}
    assert len(brute) == 165
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_criterion_03_session_refinement_counts():
    started = time.perf_counter()
    model4 = compile_text(two_session_src(4))
    assert count_runs(explore(model4)) == 70
    model3 = compile_text(two_session_src(3))
    graph3 = explore(model3)
    runs3 = enumerate_runs(graph3)
    hot = tuple(f"hot_{i}" for i in range(1, 4))
    cold = tuple(f"cold_{i}" for i in range(1, 4))
    assert {tuple(e.name for e in r.events) for r in runs3} == interleavings(hot, cold)
    assert len(runs3) == 20
    # per-session low-level order is preserved in every run
    for runs, model in ((runs3, model3), (enumerate_runs(explore(model4)), model4)):
        for scenario in runs:
            s1 = [e.name for e in scenario.events if e.session == "S1"]
            s2 = [e.name for e in scenario.events if e.session == "S2"]
            assert s1 == sorted(s1, key=lambda n: int(n.split("_")[1]))
            assert s2 == sorted(s2, key=lambda n: int(n.split("_")[1]))
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.3f}s"


def test_criterion_04_oracle_equivalence_on_random_models():
    rng = random.Random(424242)
    names = ["a", "b", "c", "d"]
    for trial in range(25):
        stories = []
        budget = 10
        for s in range(rng.randint(1, 4)):
            body = []
            while budget > 0 and (not body or rng.random() < 0.6):
                name = rng.choice(names)
                count = rng.randint(1, min(3, budget))
                budget -= count
                body.append(
                    f"request {name}" if count == 1 else f"repeat {count} {{ request {name} }}"
                )
            if body:
                stories.append(f'story "s{s}" {{ {" ".join(body)} }}')
        model = compile_text("\n".join(stories) if stories else 'story "s0" { request a }')
        ours = {r.labels() for r in enumerate_runs(explore(model))}
        assert ours == naive_runs(model), f"trial {trial} diverged"


def test_criterion_05_uniform_sampling_chi_square():
    started = time.perf_counter()
    graph = explore(compile_text(two_session_src(3)))
    runs = enumerate_runs(graph)
    assert len(runs) == 20
    samples = uniform_sample(graph, 2000, seed=13)
    index = {r.labels(): i for i, r in enumerate(runs)}
    observed = [0] * 20
    for scenario in samples:
        observed[index[scenario.labels()]] += 1
    stat, p_value = scipy.stats.chisquare(observed)
    assert p_value > 0.001, f"chi2={stat:.2f}, p={p_value:.5f}"
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"took {elapsed:.3f}s"


def test_criterion_06_ensemble_pair_coverage(tmp_path, capsys):
    proj = make_project(tmp_path / "p6", BUTTONS_CONSTRAINED_SRC)
    assert main(["ensemble", str(proj), "-c", "pairs", "--budget", "10"]) == 0
    assert "coverage ratio: 1.000000" in capsys.readouterr().out
    # covered set equals brute-force feasible targets
    graph = explore(compile_text(BUTTONS_CONSTRAINED_SRC))
    pool = enumerate_runs(graph)
    result = ensemble(pool, Criterion("pairs"), budget=10, graph=graph)
    brute = set()
    for run in pool:
        brute |= covered(run, Criterion("pairs"))
    assert result.covered == brute == feasible_targets(graph, Criterion("pairs"))
    assert result.coverage_ratio == 1.0


def test_criterion_07_cli_determinism(tmp_path, capsys):
    proj = make_project(tmp_path / "p7", BUTTONS_CONSTRAINED_SRC)
    uniform_proj = make_project(tmp_path / "p7u", two_session_src(3))
    digests = []
    for _ in range(2):
        assert main(["sample", str(proj), "-n", "8", "--seed", "21"]) == 0
        assert main(["sample", str(uniform_proj), "-n", "8", "--uniform", "--seed", "2"]) == 0
        assert main(["ensemble", str(proj), "-c", "pairs", "--budget", "5"]) == 0
        assert main(["analyze", str(proj), "-f", "json"]) == 0
        assert main(["analyze", str(proj), "-f", "gv"]) == 0
        assert main(["run", str(proj), "--sample", "3", "--seed", "4", "--timestamp", "T"]) == 0
        capsys.readouterr()
        assert main(["count", str(proj)]) == 0
        count_out = capsys.readouterr().out
        digests.append(
            (
                sha(proj / "samples.ndjson"),
                sha(uniform_proj / "samples.ndjson"),
                sha(proj / "ensemble.ndjson"),
                sha(proj / "model.json"),
                sha(proj / "model.gv"),
                sha(proj / "report.ndjson"),
                sha(proj / "report.txt"),
                count_out,
            )
        )
    assert digests[0] == digests[1]


def test_criterion_08_graph_export_round_trip(buttons_model):
    graph = explore(buttons_model)
    # lattice oracle: states are exactly (greens_left, reds_left) pairs
    lattice = {(g, r) for g in range(4) for r in range(11)}
    assert len(graph.nodes) == len(lattice) == 44
    once = to_structured(graph)
    imported, highlight = import_structured(once)
    assert to_structured(imported, highlight) == once
    assert len(json.loads(once)["nodes"]) == 44


def test_criterion_09_reporting_statistics():
    lo, hi = wilson95(0, 20)
    oracle_lo, oracle_hi = wilson_closed_form(0, 20)
    # closed-form evaluation: hi = z^2/(20+z^2) ~= 0.1611
    assert lo == 0.0
    assert abs(hi - oracle_hi) < 1e-6
    assert round(hi, 4) == 0.1611
    # interval coverage: >= 93% of 1000 seeded binomial draws per p
    from storyweave.rng import Pcg32

    rng = Pcg32(20260101)
    for p in (0.1, 0.5, 0.9):
        threshold = int(p * 2**32)
        hits = 0
        for _ in range(1000):
            k = sum(1 for _ in range(50) if rng.next_u32() < threshold)
            interval = wilson95(k, 50)
            if interval[0] <= p <= interval[1]:
                hits += 1
        assert hits >= 930, f"coverage {hits}/1000 at p={p}"


def test_criterion_10_dsl_fuzz_never_crashes():
    rng = random.Random(0xF022)
    tokens = [
        "story", "event", "request", "waitFor", "block", "until", "repeat",
        "forever", "choose", "or", "session", "{", "}", "(", ")", "[", "]",
        ",", ":", "=", '"', '"s"', "a", "x1", "-3", "12", "//", "\n", " ",
    ]
    outcomes = {"ok": 0, "diagnosed": 0}
    for i in range(10_000):
        style = i % 3
        if style == 0:
            text = bytes(rng.randrange(256) for _ in range(rng.randrange(80))).decode("latin-1")
        elif style == 1:
            text = "".join(chr(rng.randrange(1, 0x2FFF)) for _ in range(rng.randrange(60)))
        else:
            text = " ".join(rng.choice(tokens) for _ in range(rng.randrange(40)))
        try:
            ast = parse_text(text)
        except ParseError:
            outcomes["diagnosed"] += 1
            continue
        try:
            check(ast)
            outcomes["ok"] += 1
        except CheckError:
            outcomes["diagnosed"] += 1
    assert outcomes["ok"] + outcomes["diagnosed"] == 10_000
    assert outcomes["ok"] > 0 and outcomes["diagnosed"] > 0
