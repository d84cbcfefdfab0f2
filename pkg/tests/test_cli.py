"""
Tests for the command line.
"""

import pytest
import json
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from rspatio.cli import main

SCENE = {
    "width": 100,
    "height": 100,
    "frames": 5,
    "noise": 3,
    "name": "cli_scene",
    "target": {"color": [208, 48, 48], "size": [20, 20], "start": [40, 40], "depth_mm": 2000},
}


@pytest.fixture
def scene_file(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(SCENE))
    return path


class TestCli:
    def test_synth_track_eval(self, tmp_path, scene_file):
        seq_dir = tmp_path / "seq"
        out_dir = tmp_path / "out"

        assert main(["synth", str(scene_file), "--out", str(seq_dir), "--seed", "1"]) == 0
        assert (seq_dir / "gt.txt").exists()

        assert main(["track", str(seq_dir), "--out", str(out_dir)]) == 0
        for name in ("boxes.csv", "metrics.txt", "cle.csv", "track.json", "tracker.cfg"):
            assert (out_dir / name).exists()

        assert main(["eval", str(out_dir / "boxes.csv"), str(seq_dir / "gt.txt")]) == 0

    def test_bench(self, tmp_path, scene_file):
        root = tmp_path / "dataset"
        main(["synth", str(scene_file), "--out", str(root / "a"), "--seed", "0"])
        main(["synth", str(scene_file), "--out", str(root / "b"), "--seed", "1"])

        assert main(["bench", str(root), "--out", str(tmp_path / "bench")]) == 0
        summary = (tmp_path / "bench" / "summary.md").read_text()
        assert "| a |" in summary and "| b |" in summary

    def test_missing_sequence_returns_error(self, tmp_path, capsys):
        assert main(["track", str(tmp_path / "missing")]) == 2
        assert "❌" in capsys.readouterr().err

    def test_env_seed_override(self, tmp_path, scene_file, monkeypatch):
        monkeypatch.setenv("RSPATIO_SEED", "5")
        seq_dir = tmp_path / "seq"
        main(["synth", str(scene_file), "--out", str(seq_dir)])
        assert main(["track", str(seq_dir), "--out", str(tmp_path / "out")]) == 0
        assert "seed = 5" in (tmp_path / "out" / "tracker.cfg").read_text().splitlines()
