"""
Tests for localization module.
"""

import pytest
import numpy as np
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from rspatio.depth_segmentation import ComponentMask
from rspatio.frames import BoundingBox
from rspatio.localization import (
    MaskedMap,
    VanishedTargetError,
    masked_map,
    mean_shift,
    mean_shift_trace,
    weighted_centroid,
)


@pytest.fixture
def blob_map():
    """Mapa 100x100 com um bloco 20x20 de peso 1 em (35, 35)."""
    values = np.zeros((100, 100))
    values[35:55, 35:55] = 1.0
    return MaskedMap(values)


class TestMaskedMap:
    def test_product(self):
        im = np.full((4, 4), 2.0)
        mask = np.eye(4, dtype=np.uint8)
        m = masked_map(im, ComponentMask(mask=mask), origin=(3, 7))
        assert m.values.sum() == 8.0
        assert m.extent == BoundingBox(3, 7, 4, 4)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            masked_map(np.ones((4, 4)), np.ones((4, 5)))


class TestWeightedCentroid:
    def test_uniform_map(self):
        m = MaskedMap(np.ones((10, 10)))
        assert weighted_centroid(m, BoundingBox(0, 0, 10, 10)) == (5.0, 5.0)

    def test_zero_mass(self):
        with pytest.raises(VanishedTargetError):
            weighted_centroid(MaskedMap(np.zeros((10, 10))), BoundingBox(2, 2, 4, 4))

    def test_window_off_map(self):
        with pytest.raises(VanishedTargetError):
            weighted_centroid(MaskedMap(np.ones((10, 10))), BoundingBox(20, 20, 4, 4))


class TestMeanShift:
    """Tests for mean-shift localization."""

    def test_fixed_point(self, blob_map):
        trace = mean_shift_trace(blob_map, BoundingBox(35, 35, 20, 20))
        assert trace.bb == BoundingBox(35, 35, 20, 20)
        assert trace.iterations == 1
        assert trace.shifts == [0.0]

    def test_converges_onto_blob(self, blob_map):
        trace = mean_shift_trace(blob_map, BoundingBox(25, 25, 20, 20))
        assert trace.bb == BoundingBox(35, 35, 20, 20)
        assert trace.iterations == 4
        assert trace.shifts[-1] < 1.0
        assert all(a >= b for a, b in zip(trace.shifts, trace.shifts[1:]))

    def test_size_is_kept(self, blob_map):
        bb = mean_shift(blob_map, BoundingBox(30, 28, 12, 9))
        assert (bb.w, bb.h) == (12, 9)

    def test_max_iter(self, blob_map):
        trace = mean_shift_trace(blob_map, BoundingBox(30, 30, 20, 20), max_iter=1)
        assert trace.iterations == 1
        assert trace.bb == BoundingBox(33, 33, 20, 20)

    def test_vanished_target(self):
        m = MaskedMap(np.zeros((50, 50)))
        with pytest.raises(VanishedTargetError):
            mean_shift(m, BoundingBox(10, 10, 10, 10))

    def test_origin_offset(self):
        values = np.zeros((40, 40))
        values[15:25, 15:25] = 1.0
        m = MaskedMap(values, origin=(50, 60))
        trace = mean_shift_trace(m, BoundingBox(62, 72, 10, 10))
        assert trace.bb == BoundingBox(65, 75, 10, 10)
        assert trace.shifts[0] == pytest.approx(np.hypot(1.5, 1.5))

    def test_init_must_touch_map(self, blob_map):
        with pytest.raises(ValueError, match="does not intersect"):
            mean_shift(blob_map, BoundingBox(200, 200, 10, 10))
