"""
Tests for config module.
"""

import pytest
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from rspatio.config import SEED_ENV_VAR, TrackerConfig


class TestSerialization:
    """Tests for the key = value config format."""

    def test_round_trip_is_byte_identical(self):
        config = TrackerConfig(alpha=0.55, seed=12, clamped_ratio=True, depth_normalization="frame")
        text = config.dumps()
        again = TrackerConfig.loads(text)
        assert again == config
        assert again.dumps() == text

    def test_defaults_listed_in_order(self):
        lines = TrackerConfig().dumps().splitlines()
        assert lines[0] == "levels_per_channel = 8"
        assert "alpha = 0.7" in lines
        assert "clamped_ratio = false" in lines
        assert lines[-1] == "depth_normalization = sequence"

    def test_comments_and_blank_lines(self):
        text = "# configuração de teste\n\nalpha = 0.5  # metade dos bins\nseed = 3\n"
        config = TrackerConfig.loads(text)
        assert config.alpha == 0.5
        assert config.seed == 3
        assert config.levels_per_channel == 8

    def test_quoted_values_and_export_prefix(self):
        config = TrackerConfig.loads('export depth_normalization = "frame"\nseed = \'4\'\n')
        assert config.depth_normalization == "frame"
        assert config.seed == 4

    def test_key_without_value(self):
        with pytest.raises(ValueError, match="malformed config line 1"):
            TrackerConfig.loads("seed\n")

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown config key: gamma"):
            TrackerConfig.loads("gamma = 1.0\n")

    def test_malformed_line(self):
        with pytest.raises(ValueError, match="malformed config line 1"):
            TrackerConfig.loads("alpha 0.5\n")

    def test_invalid_values(self):
        with pytest.raises(ValueError, match="invalid value for seed"):
            TrackerConfig.loads("seed = abc\n")
        with pytest.raises(ValueError, match="invalid value for clamped_ratio"):
            TrackerConfig.loads("clamped_ratio = maybe\n")


class TestValidation:
    @pytest.mark.parametrize(
        "override",
        [
            {"alpha": 0.0},
            {"forgetting_factor": 1.5},
            {"kmeans_clusters": 1},
            {"similarity_threshold": 1.2},
            {"depth_normalization": "global"},
        ],
    )
    def test_rejects_out_of_range(self, override):
        with pytest.raises(ValueError):
            TrackerConfig(**override)

    def test_derived_objects(self):
        config = TrackerConfig(levels_per_channel=4, grid_rows=2, clamped_ratio=True)
        assert config.quantizer.bin_count == 64
        assert config.depth_quantizer.bin_count == 32
        assert config.grid.cell_count == 6
        assert config.matcher.clamped


class TestFiles:
    def test_save_and_load(self, tmp_path):
        config = TrackerConfig(seed=9, top_frac=0.2)
        path = config.save(tmp_path / "cfg" / "tracker.cfg")
        assert TrackerConfig.from_file(path) == config

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            TrackerConfig.from_file(tmp_path / "nope.cfg")


class TestEnvOverrides:
    def test_seed_from_environment(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "42")
        assert TrackerConfig(seed=1).with_env_overrides().seed == 42

    def test_unset_keeps_file_seed(self, monkeypatch):
        monkeypatch.delenv(SEED_ENV_VAR, raising=False)
        assert TrackerConfig(seed=1).with_env_overrides().seed == 1

    def test_invalid_seed(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, "dez")
        with pytest.raises(ValueError, match="must be an integer"):
            TrackerConfig().with_env_overrides()


class TestShippedConfig:
    def test_reference_file_matches_defaults(self):
        path = Path(__file__).parent.parent / "configs" / "tracker.cfg"
        assert TrackerConfig.from_file(path) == TrackerConfig()
