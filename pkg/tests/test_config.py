"""Project config parsing and adapter construction."""

import pytest

from storyweave.config import ConfigError, load_config
from storyweave.runner import AdapterMisconfiguredError, ExecAdapter, HttpAdapter, MockAdapter


def write_config(tmp_path, text):
    (tmp_path / "config.toml").write_text(text, encoding="utf-8")
    return tmp_path


class TestDefaults:
    def test_missing_file_gives_defaults(self, tmp_path):
        config = load_config(tmp_path)
        assert config.seed == 0
        assert config.max_depth == 10_000
        assert config.adapter == "mock"
        assert config.renderer == "dot"
        assert config.ensemble_pool_max_exact == 10_000
        assert config.ensemble_pool_sample_size == 1_000
        assert config.workers == 1
        assert not config.continue_on_failure

    def test_default_adapter_is_permissive_mock(self, tmp_path):
        adapter = load_config(tmp_path).build_adapter()
        assert isinstance(adapter, MockAdapter)


class TestParsing:
    def test_full_config(self, tmp_path):
        write_config(
            tmp_path,
            """
            seed = 42
            max_depth = 50
            adapter = "http"
            renderer = "/usr/bin/dot"
            tags = ["smoke", "cart"]
            continue_on_failure = true
            workers = 4

            [weights]
            push = 3

            [adapters.http]
            base_url = "http://localhost:9"
            timeout = 2.5
            expected_status = [200, 204]

            [adapters.mock]
            verdicts = { push = "fail" }
            """,
        )
        config = load_config(tmp_path)
        assert config.seed == 42
        assert config.max_depth == 50
        assert config.tags == ("smoke", "cart")
        assert config.weights == {"push": 3}
        assert config.continue_on_failure
        assert config.workers == 4
        adapter = config.build_adapter()
        assert isinstance(adapter, HttpAdapter)
        assert adapter.base_url == "http://localhost:9"
        assert adapter.expected_status == (200, 204)
        mock = config.build_adapter("mock")
        assert mock.verdicts == (("push", "fail"),)

    def test_exec_adapter(self, tmp_path):
        write_config(
            tmp_path,
            """
            adapter = "exec"
            [adapters.exec]
            command = ["/bin/sh", "-c", "exit 0"]
            timeout = 1.0
            """,
        )
        adapter = load_config(tmp_path).build_adapter()
        assert isinstance(adapter, ExecAdapter)
        assert adapter.command[0] == "/bin/sh"

    def test_bad_toml(self, tmp_path):
        write_config(tmp_path, "this is { not toml")
        with pytest.raises(ConfigError):
            load_config(tmp_path)

    def test_bad_tags(self, tmp_path):
        write_config(tmp_path, "tags = [1, 2]")
        with pytest.raises(ConfigError, match="tags"):
            load_config(tmp_path)

    def test_bad_weights(self, tmp_path):
        write_config(tmp_path, '[weights]\npush = "three"')
        with pytest.raises(ConfigError, match="weights"):
            load_config(tmp_path)

    def test_unknown_adapter_kind(self, tmp_path):
        write_config(tmp_path, 'adapter = "telepathy"')
        with pytest.raises(AdapterMisconfiguredError, match="telepathy"):
            load_config(tmp_path).build_adapter()

    def test_echo_is_stable(self, tmp_path):
        write_config(tmp_path, 'seed = 7\ntags = ["b", "a"]')
        assert load_config(tmp_path).echo() == {
            "adapter": "mock",
            "seed": 7,
            "max_depth": 10_000,
            "tags": ["a", "b"],
        }
