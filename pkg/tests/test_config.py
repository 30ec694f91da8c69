"""
Tests for settings and pipeline configuration loading
"""
from pathlib import Path

import pytest

from app.config import PipelineConfig, get_settings
from app.config.settings import DEFAULT_PROVIDER_RULES
from app.exceptions import ConfigError
from app.models import MemMethod, SplitRounding

PIPELINE_TOML = """
seed = 42
timezone = "Europe/Berlin"

[paths]
network = "inputs/net.geojson"

[detector]
merge_gap_s = 120.0

[analysis]
split_rounding = "ceil"
mem_method = "ratio_of_totals"
correlation_days = [0, 1, 2, 3, 4]

[simulation]
n_pedestrians = 2
"""


def write(tmp_path, text, name="pipeline.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestSettings:

    def test_defaults(self, isolated_settings):
        assert isolated_settings.default_timezone == "America/Chicago"
        assert Path(isolated_settings.provider_rules_path) == DEFAULT_PROVIDER_RULES
        assert DEFAULT_PROVIDER_RULES.is_file()

    def test_cached(self, isolated_settings):
        assert get_settings() is get_settings()

    def test_environment_overrides(self, isolated_settings, monkeypatch):
        monkeypatch.setenv("DEFAULT_TIMEZONE", "UTC")
        monkeypatch.setenv("MAX_WORKERS", "3")
        get_settings.cache_clear()
        config = PipelineConfig.load()
        assert config.timezone == "UTC"
        assert config.max_workers == 3

    def test_storage_backend(self, isolated_settings, monkeypatch):
        assert PipelineConfig.load().storage_backend == "file_storage"
        monkeypatch.setenv("STORAGE_BACKEND", "memory")
        get_settings.cache_clear()
        assert PipelineConfig.load().storage_backend == "memory"


class TestPipelineConfigLoad:

    def test_defaults_without_file(self, isolated_settings, tmp_path):
        config = PipelineConfig.load()
        assert config.seed == 7
        assert config.output_dir == tmp_path / "default-out"
        assert config.paths.provider_rules == DEFAULT_PROVIDER_RULES
        assert config.detector.timezone == "America/Chicago"
        assert config.simulation.seed == 7
        assert config.analysis.split_rounding == SplitRounding.FLOOR
        assert config.analysis.correlation_days == [0, 1, 2, 3, 4, 5]

    def test_file_values_propagate(self, isolated_settings, tmp_path):
        config = PipelineConfig.load(write(tmp_path, PIPELINE_TOML))
        assert config.seed == 42
        assert config.simulation.seed == 42
        assert config.detector.timezone == "Europe/Berlin"
        assert config.simulation.timezone == "Europe/Berlin"
        assert config.detector.merge_gap_s == 120.0
        assert config.simulation.detector.merge_gap_s == 120.0
        assert config.simulation.n_pedestrians == 2
        assert config.analysis.mem_method == MemMethod.RATIO_OF_TOTALS
        assert config.analysis.correlation_days == [0, 1, 2, 3, 4]

    def test_relative_paths_resolve_against_file(self, isolated_settings, tmp_path):
        config = PipelineConfig.load(write(tmp_path, PIPELINE_TOML))
        assert config.paths.network == tmp_path / "inputs" / "net.geojson"

    def test_overrides_beat_file(self, isolated_settings, tmp_path):
        overrides = {"seed": 9, "simulation": {"seed": 9}, "paths": {"network": "elsewhere.geojson"}}
        config = PipelineConfig.load(write(tmp_path, PIPELINE_TOML), overrides)
        assert config.seed == 9
        assert config.simulation.seed == 9
        assert config.paths.network == Path("elsewhere.geojson")

    def test_none_overrides_are_ignored(self, isolated_settings, tmp_path):
        config = PipelineConfig.load(write(tmp_path, PIPELINE_TOML), {"seed": None, "output_dir": None})
        assert config.seed == 42

    def test_section_timezone_is_kept(self, isolated_settings, tmp_path):
        path = write(tmp_path, 'timezone = "UTC"\n[detector]\ntimezone = "America/Denver"\n')
        config = PipelineConfig.load(path)
        assert config.timezone == "UTC"
        assert config.detector.timezone == "America/Denver"


class TestPipelineConfigErrors:

    def test_missing_file(self, isolated_settings, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            PipelineConfig.load(tmp_path / "absent.toml")

    def test_malformed_toml(self, isolated_settings, tmp_path):
        with pytest.raises(ConfigError):
            PipelineConfig.load(write(tmp_path, "seed = = 3\n"))

    @pytest.mark.parametrize("text", [
        'timezone = "Mars/Olympus"\n',
        "[analysis]\ncorrelation_days = [7]\n",
        "[detector]\nwindow_length_s = 10.0\nmerge_gap_s = 5.0\n",
        "max_workers = 0\n",
        '[analysis]\npem_formula = "median"\n',
    ])
    def test_invalid_values(self, isolated_settings, tmp_path, text):
        with pytest.raises(ConfigError):
            PipelineConfig.load(write(tmp_path, text))


class TestRequire:

    def test_unset_path(self, isolated_settings):
        with pytest.raises(ConfigError, match="--campus-polygons"):
            PipelineConfig.load().require("campus_polygons")

    def test_missing_path(self, isolated_settings, tmp_path):
        config = PipelineConfig.load(overrides={"paths": {"network": str(tmp_path / "none.geojson")}})
        with pytest.raises(ConfigError, match="does not exist"):
            config.require("network")

    def test_existing_path(self, isolated_settings, tmp_path):
        target = write(tmp_path, "{}", name="net.geojson")
        config = PipelineConfig.load(overrides={"paths": {"network": str(target)}})
        assert config.require("network") == target
