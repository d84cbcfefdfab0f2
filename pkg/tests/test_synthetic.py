"""
Tests for synthetic module.
"""

import pytest
import json
import numpy as np
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from rspatio.descriptors import Quantizer
from rspatio.frames import BoundingBox
from rspatio.synthetic import (
    MovingRect,
    SceneSpec,
    ground_truth,
    linear_motion_scene,
    occlusion_scene,
    render_sequence,
    synthesize_sequence,
    visible_fraction,
)

TARGET_BIN = 393
BACKGROUND_BIN = 97
OCCLUDER_BIN = 78


class TestSceneSpec:
    """Tests for scene description and ground truth."""

    def test_ground_truth_positions(self):
        gt = ground_truth(linear_motion_scene())
        assert len(gt) == 100
        assert gt[0] == BoundingBox(5, 20, 30, 30)
        assert gt[10] == BoundingBox(21, 32, 30, 30)
        assert gt[99] == BoundingBox(163, 139, 30, 30)
        assert gt.occluded_indices == []

    def test_occluded_window(self):
        spec = occlusion_scene()
        assert ground_truth(spec).occluded_indices == list(range(40, 56))
        assert visible_fraction(spec, 0) == 1.0
        assert visible_fraction(spec, 45) == 0.0
        assert 0.0 < visible_fraction(spec, 56) < 1.0

    def test_occluder_must_be_closer(self):
        target = MovingRect(color=(208, 48, 48), size=(30, 30), start=(5, 20), depth_mm=2500)
        occluder = MovingRect(color=(48, 48, 208), size=(10, 10), start=(0, 0), depth_mm=3000)
        with pytest.raises(ValueError, match="invalid occluder"):
            SceneSpec(target=target, occluder=occluder)

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(occlusion_scene().to_dict()))
        assert SceneSpec.from_file(path) == occlusion_scene()

    def test_unknown_key(self):
        data = linear_motion_scene().to_dict()
        data["colour"] = [1, 2, 3]
        with pytest.raises(ValueError, match="unknown scene key: colour"):
            SceneSpec.from_dict(data)


class TestRendering:
    """Tests for frame rendering."""

    def test_noise_free_crops_are_identical(self):
        seq = render_sequence(linear_motion_scene(noise=0, frames=20))
        gt = seq.ground_truth
        first = seq.colors[0][gt[0].slices]
        later = seq.colors[15][gt[15].slices]
        assert np.array_equal(first, later)
        assert np.all(first == (208, 48, 48))

    def test_seed_determinism(self):
        a = render_sequence(linear_motion_scene(frames=5), seed=3)
        b = render_sequence(linear_motion_scene(frames=5), seed=3)
        c = render_sequence(linear_motion_scene(frames=5), seed=4)
        assert all(np.array_equal(x, y) for x, y in zip(a.colors, b.colors))
        assert not np.array_equal(a.colors[1], c.colors[1])

    def test_noise_keeps_colours_in_their_bins(self):
        seq = render_sequence(occlusion_scene(), seed=3)
        q = Quantizer()
        seen = set()
        for t in (0, 30, 45, 60):
            seen |= set(np.unique(q.quantize(seq.colors[t])).tolist())
        assert seen == {TARGET_BIN, BACKGROUND_BIN, OCCLUDER_BIN}

    def test_depth_in_millimetres(self):
        seq = render_sequence(occlusion_scene(), seed=0)
        raw = seq.raw_depths[45]
        assert raw.dtype == np.uint16
        assert set(np.unique(raw).tolist()) == {1200, 4000}
        assert seq.depth_range == (1200.0, 4000.0)

    def test_written_layout(self, tmp_path):
        spec = linear_motion_scene(frames=3)
        out = synthesize_sequence(spec, seed=7, out_dir=tmp_path / "seq")
        assert sorted(p.name for p in (out / "rgb").iterdir()) == ["00000.png", "00001.png", "00002.png"]
        assert sorted(p.name for p in (out / "depth").iterdir()) == ["00000.png", "00001.png", "00002.png"]
        assert (out / "init.txt").read_text().strip() == "5,20,30,30"
        assert len((out / "gt.txt").read_text().splitlines()) == 3
        assert json.loads((out / "scene.json").read_text())["seed"] == 7
        assert SceneSpec.from_file(out / "scene.json") == spec

    def test_occluded_rows_written_as_occ(self, tmp_path):
        out = synthesize_sequence(occlusion_scene(frames=45), seed=0, out_dir=tmp_path / "occ")
        lines = (out / "gt.txt").read_text().splitlines()
        assert lines[40:] == ["occ"] * 5
        assert lines[39] != "occ"


class TestShippedScene:
    def test_occlusion_scene_file(self):
        path = Path(__file__).parent.parent / "configs" / "occlusion_scene.json"
        assert SceneSpec.from_file(path) == occlusion_scene()
