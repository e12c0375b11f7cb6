"""Shared model fixtures used across the suite."""

from pathlib import Path

import pytest

from storyweave import compile_text

# Two unconstrained button stories: 3 greens woven with 10 reds.
BUTTONS_SRC = """\
story "greens" { repeat 3 { request push(color: "green") } }

story "reds" { repeat 10 { request push(color: "red") } }
"""

CONSTRAINT_SRC = """\
story "no-adjacent-greens" {
  forever {
    waitFor push(color: "green")
    block push(color: "green") until push(color: "red")
  }
}
"""

BUTTONS_CONSTRAINED_SRC = BUTTONS_SRC + "\n" + CONSTRAINT_SRC


def two_session_src(per_event: int) -> str:
    hot = ", ".join(f"hot_{i}()" for i in range(1, per_event + 1))
    cold = ", ".join(f"cold_{i}()" for i in range(1, per_event + 1))
    return (
        f"event HOT() = [{hot}]\n"
        f"event COLD() = [{cold}]\n"
        'story "hot" { session S1 { request HOT } }\n'
        'story "cold" { session S2 { request COLD } }\n'
    )


SEARCH_SRC = """\
event ComposeQuery(text) = [type_query(text: text), press_enter()]
event StartSearch() = [click_search()]

story "SearchPizzaOnGoogle" {
  session A1 {
    request ComposeQuery(text: "Pizza")
    request StartSearch
  }
}
"""


@pytest.fixture(scope="session")
def buttons_model():
    return compile_text(BUTTONS_SRC)


@pytest.fixture(scope="session")
def constrained_model():
    return compile_text(BUTTONS_CONSTRAINED_SRC)


@pytest.fixture(scope="session")
def sessions4_model():
    return compile_text(two_session_src(4))


@pytest.fixture(scope="session")
def sessions3_model():
    return compile_text(two_session_src(3))


def make_project(root: Path, source: str, config: str | None = None) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "model.story").write_text(source, encoding="utf-8")
    if config is not None:
        (root / "config.toml").write_text(config, encoding="utf-8")
    return root
