"""
Tests for evaluation module.
"""

import pytest
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from rspatio.evaluation import (
    GroundTruth,
    acle,
    aor,
    center_error,
    evaluate,
    overlap_ratio,
)
from rspatio.frames import BoundingBox


class TestMetrics:
    """Tests for per-frame metrics."""

    def test_center_error(self):
        assert center_error(BoundingBox(0, 0, 10, 10), BoundingBox(3, 4, 10, 10)) == 5.0
        assert center_error(BoundingBox(0, 0, 10, 10), BoundingBox(10, 0, 10, 10)) == 10.0

    def test_overlap_half_shift(self):
        # intersecção 5x10 = 50, união 150
        assert overlap_ratio(BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 10, 10)) == pytest.approx(1 / 3)

    def test_overlap_bounds(self):
        bb = BoundingBox(2, 3, 7, 9)
        assert overlap_ratio(bb, bb) == 1.0
        assert overlap_ratio(bb, BoundingBox(50, 50, 7, 9)) == 0.0
        assert overlap_ratio(BoundingBox(0, 0, 0, 5), bb) == 0.0

    def test_translation_invariance(self):
        a, b = BoundingBox(0, 0, 10, 10), BoundingBox(4, 3, 8, 12)
        moved_a, moved_b = a.translate(17, -5), b.translate(17, -5)
        assert center_error(a, b) == pytest.approx(center_error(moved_a, moved_b))
        assert overlap_ratio(a, b) == pytest.approx(overlap_ratio(moved_a, moved_b))

    def test_scale_invariance_of_overlap(self):
        a, b = BoundingBox(0, 0, 10, 10), BoundingBox(4, 3, 8, 12)
        scaled_a = BoundingBox(0, 0, 30, 30)
        scaled_b = BoundingBox(12, 9, 24, 36)
        assert overlap_ratio(a, b) == pytest.approx(overlap_ratio(scaled_a, scaled_b))
        assert center_error(scaled_a, scaled_b) == pytest.approx(3 * center_error(a, b))


class TestAggregates:
    """Tests for ACLE / AOR over a sequence."""

    @pytest.fixture
    def preds(self):
        return [BoundingBox(0, 0, 10, 10), BoundingBox(10, 0, 10, 10), BoundingBox(50, 50, 10, 10)]

    def test_mean_center_error(self, preds):
        gts = [BoundingBox(0, 0, 10, 10), BoundingBox(0, 0, 10, 10), BoundingBox(50, 50, 10, 10)]
        # erros 0, 10 e 0
        assert acle(preds[:2], gts[:2]) == 5.0
        assert acle(preds, gts) == pytest.approx(10 / 3)

    def test_occluded_frames_excluded(self, preds):
        gts = GroundTruth.from_list([BoundingBox(0, 0, 10, 10), None, BoundingBox(50, 50, 10, 10)])
        report = evaluate(preds, list(gts))
        assert report.acle == 0.0
        assert report.aor == 1.0
        assert report.evaluated_frames == 2
        assert report.occluded_frames == 1
        assert report.per_frame_cle[1] is None
        assert gts.occluded_indices == [1]
        assert report.to_dict()["acle_px"] == 0.0

    def test_frame_count_mismatch(self, preds):
        with pytest.raises(ValueError, match="frame count mismatch"):
            aor(preds, [BoundingBox(0, 0, 10, 10)])

    def test_no_evaluated_frames(self, preds):
        with pytest.raises(ValueError, match="no evaluated frames"):
            evaluate(preds, [None, None, None])
        with pytest.raises(ValueError, match="no evaluated frames"):
            acle(preds, [None, None, None])
