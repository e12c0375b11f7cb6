"""Project configuration: a directory of .story files plus config.toml.

Every key is optional; missing file means all defaults. Keys:

  seed                      default random seed (int, default 0)
  max_depth                 run/exploration depth cap (int, default 10000)
  adapter                   "mock" | "exec" | "http" (default "mock")
  renderer                  dot renderer executable (default "dot")
  tags                      extra tags applied to every executed run
  continue_on_failure       keep dispatching after a failed event (default false)
  workers                   concurrent scenario executions (default 1)
  ensemble_pool_max_exact   enumerate pool when run count <= this (default 10000)
  ensemble_pool_sample_size walk-sample pool size otherwise (default 1000)
  [weights]                 event-name -> integer ensemble weight
  [adapters.mock]           verdicts = { event_name = "pass"|"fail"|"error" }
  [adapters.exec]           command = ["prog", ...], timeout = seconds
  [adapters.http]           base_url, timeout, expected_status = [lo, hi]
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .runner import Adapter, AdapterMisconfiguredError, ExecAdapter, HttpAdapter, MockAdapter

CONFIG_FILE = "config.toml"


class ConfigError(ValueError):
    """config.toml is unreadable or malformed."""


@dataclass
class ProjectConfig:
    project_dir: Path
    seed: int = 0
    max_depth: int = 10_000
    adapter: str = "mock"
    renderer: str = "dot"
    tags: tuple[str, ...] = ()
    continue_on_failure: bool = False
    workers: int = 1
    ensemble_pool_max_exact: int = 10_000
    ensemble_pool_sample_size: int = 1_000
    weights: dict[str, int] = field(default_factory=dict)
    adapter_settings: dict = field(default_factory=dict)

    def build_adapter(self, name: str | None = None) -> Adapter:
        kind = name or self.adapter
        settings = self.adapter_settings.get(kind, {})
        if kind == "mock":
            adapter: Adapter = MockAdapter.make(settings.get("verdicts", {}))
        elif kind == "exec":
            adapter = ExecAdapter(
                tuple(settings.get("command", ())),
                float(settings.get("timeout", 10.0)),
            )
        elif kind == "http":
            adapter = HttpAdapter(
                str(settings.get("base_url", "")),
                float(settings.get("timeout", 10.0)),
                tuple(settings.get("expected_status", (200, 299))),  # type: ignore[arg-type]
            )
        else:
            raise AdapterMisconfiguredError(
                f"unknown adapter {kind!r}; expected mock, exec, or http"
            )
        adapter.validate()
        return adapter

    def echo(self) -> dict:
        """Stable summary embedded in reports."""
        return {
            "adapter": self.adapter,
            "seed": self.seed,
            "max_depth": self.max_depth,
            "tags": sorted(self.tags),
        }


def load_config(project_dir: str | Path) -> ProjectConfig:
    directory = Path(project_dir)
    config = ProjectConfig(project_dir=directory)
    path = directory / CONFIG_FILE
    if not path.exists():
        return config
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    scalars = {
        "seed": int,
        "max_depth": int,
        "adapter": str,
        "renderer": str,
        "continue_on_failure": bool,
        "workers": int,
        "ensemble_pool_max_exact": int,
        "ensemble_pool_sample_size": int,
    }
    for key, cast in scalars.items():
        if key in data:
            try:
                setattr(config, key, cast(data[key]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{path}: bad value for {key!r}: {data[key]!r}") from exc
    if "tags" in data:
        tags = data["tags"]
        if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
            raise ConfigError(f"{path}: 'tags' must be a list of strings")
        config.tags = tuple(tags)
    if "weights" in data:
        weights = data["weights"]
        if not isinstance(weights, dict) or not all(
            isinstance(v, int) for v in weights.values()
        ):
            raise ConfigError(f"{path}: [weights] must map event names to integers")
        config.weights = dict(weights)
    adapters = data.get("adapters", {})
    if not isinstance(adapters, dict):
        raise ConfigError(f"{path}: [adapters] must be a table of adapter settings")
    config.adapter_settings = {k: v for k, v in adapters.items() if isinstance(v, dict)}
    return config
