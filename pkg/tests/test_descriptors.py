"""
Tests for descriptors module.
"""

import math
import time

import pytest
import numpy as np
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from rspatio.descriptors import (
    Quantizer,
    SubregionGrid,
    RSpatiogram,
    RSpatiogramMatcher,
    Spatiogram,
    compute_histogram,
    compute_rspatiogram,
    depth_spatiogram,
    ratio_similarity,
    rspatiogram_similarity,
)
from rspatio.frames import BoundingBox, RgbdFrame


def naive_rspatiogram(region, quantizer, grid):
    """Double-loop reference: tallies, mean sums and per-cell tallies."""
    h, w = region.shape[:2]
    B = quantizer.bin_count
    tallies = np.zeros(B, dtype=np.int64)
    sums = np.zeros((B, 2))
    cells = np.zeros((B, grid.cell_count), dtype=np.int64)
    cell_h, cell_w = h // grid.rows, w // grid.cols
    bins = quantizer.quantize(region)
    for j in range(h):
        for i in range(w):
            b = int(bins[j, i])
            tallies[b] += 1
            sums[b, 0] += 2 * (i + 0.5) / w - 1
            sums[b, 1] += 2 * (j + 0.5) / h - 1
            row = min(j // cell_h, grid.rows - 1)
            col = min(i // cell_w, grid.cols - 1)
            cells[b, row * grid.cols + col] += 1
    return tallies, sums, cells


class TestQuantizer:
    """Tests for the joint RGB quantizer."""

    def test_joint_bin_index(self):
        q = Quantizer(levels_per_channel=8)
        assert q.bin_count == 512
        assert int(q.quantize(np.array([128, 0, 255]))) == 263

    def test_top_value_lands_in_last_level(self):
        q = Quantizer(levels_per_channel=8, channel_count=1)
        assert int(q.quantize(np.array(255))) == 7
        assert int(q.quantize(np.array(0))) == 0

    def test_out_of_range_rejected(self):
        q = Quantizer()
        with pytest.raises(ValueError, match="outside quantizer range"):
            q.quantize(np.array([[300, 0, 0]]))

    def test_depth_bin_center(self):
        q = Quantizer(levels_per_channel=32, channel_count=1)
        assert q.bin_center(0) == 4.0
        assert q.bin_center(31) == 252.0


class TestSubregionGrid:
    """Tests for subregion partitioning."""

    def test_remainder_goes_to_last_cell(self):
        cells = SubregionGrid(3, 3).cell_index(7, 7)
        assert cells[0, 0] == 0
        assert cells[6, 6] == 8
        # 7 // 3 = 2: rows 4, 5 and 6 belong to the last row of cells
        assert list(cells[:, 0]) == [0, 0, 3, 3, 6, 6, 6]

    def test_grid_exceeds_region(self):
        with pytest.raises(ValueError, match="grid exceeds region"):
            SubregionGrid(3, 3).cell_index(2, 10)


class TestRSpatiogram:
    """Tests for r-spatiogram construction."""

    @pytest.fixture
    def rng(self):
        return np.random.default_rng(7)

    def test_histogram_sums_to_one(self, rng):
        region = rng.integers(0, 256, size=(12, 9, 3))
        h = compute_histogram(region, Quantizer())
        assert h.sum() == pytest.approx(1.0)
        assert np.all(h >= 0)

    def test_matches_double_loop_oracle(self, rng):
        q = Quantizer(levels_per_channel=4)
        grid = SubregionGrid()
        for _ in range(200):
            h, w = rng.integers(3, 33, size=2)
            region = rng.integers(0, 256, size=(h, w, 3))
            desc = compute_rspatiogram(region, q, grid)
            tallies, sums, cells = naive_rspatiogram(region, q, grid)

            assert np.array_equal(desc.base.tallies, tallies)
            assert np.array_equal(desc.cell_tallies, cells)
            occupied = tallies > 0
            assert np.allclose(desc.means[occupied], sums[occupied] / tallies[occupied, None])
            assert np.allclose(desc.ratios[occupied].sum(axis=1), 1.0)
            assert np.all(desc.means[~occupied] == 0)

    def test_empty_region(self):
        with pytest.raises(ValueError, match="empty region"):
            compute_rspatiogram(np.zeros((0, 5, 3), dtype=np.uint8), Quantizer())

    def test_uniform_region_mean_is_center(self):
        region = np.full((6, 10, 3), 200, dtype=np.uint8)
        desc = compute_rspatiogram(region, Quantizer())
        b = int(Quantizer().quantize(np.array([200, 200, 200])))
        assert desc.counts[b] == 1.0
        assert desc.means[b] == pytest.approx([0.0, 0.0], abs=1e-12)

    def test_depth_spatiogram_needs_single_channel(self):
        with pytest.raises(ValueError):
            depth_spatiogram(np.zeros((4, 4)), Quantizer(levels_per_channel=8, channel_count=3))


class TestSimilarity:
    """Tests for rho between r-spatiograms."""

    def test_self_similarity_and_symmetry(self):
        rng = np.random.default_rng(11)
        q = Quantizer()
        start = time.perf_counter()
        for _ in range(1000):
            h, w = rng.integers(3, 17, size=2)
            levels = rng.integers(1, 5)
            a = rng.integers(0, levels, size=(h, w, 3)) * (255 // levels)
            b = rng.integers(0, levels, size=(h, w, 3)) * (255 // levels)
            da = compute_rspatiogram(a, q)
            db = compute_rspatiogram(b, q)
            assert abs(rspatiogram_similarity(da, da) - 1.0) < 1e-9
            assert abs(rspatiogram_similarity(da, db) - rspatiogram_similarity(db, da)) < 1e-12
        assert time.perf_counter() - start < 10.0

    def test_self_similarity_with_covariance(self):
        rng = np.random.default_rng(3)
        region = rng.integers(0, 256, size=(15, 12, 3))
        desc = compute_rspatiogram(region, Quantizer(), with_covariance=True)
        assert rspatiogram_similarity(desc, desc) == pytest.approx(1.0, abs=1e-9)

    def test_disjoint_colors_score_zero(self):
        red = np.zeros((9, 9, 3), dtype=np.uint8)
        red[..., 0] = 250
        blue = np.zeros((9, 9, 3), dtype=np.uint8)
        blue[..., 2] = 250
        q = Quantizer()
        assert rspatiogram_similarity(compute_rspatiogram(red, q), compute_rspatiogram(blue, q)) == 0.0

    def test_shape_mismatch(self):
        region = np.zeros((9, 9, 3), dtype=np.uint8)
        a = compute_rspatiogram(region, Quantizer(levels_per_channel=8))
        b = compute_rspatiogram(region, Quantizer(levels_per_channel=4))
        with pytest.raises(ValueError, match="descriptor shape mismatch"):
            rspatiogram_similarity(a, b)

    def test_ratio_similarity_variants(self):
        same = np.array([[0.5, 0.5, 0.0]])
        opposite_a = np.array([[1.0, 0.0, 0.0]])
        opposite_b = np.array([[0.0, 0.0, 1.0]])
        assert ratio_similarity(same, same)[0] == 1.0
        # rDist = 2: the literal form folds back to 1, the clamped form reaches 0
        assert ratio_similarity(opposite_a, opposite_b)[0] == pytest.approx(1.0)
        assert ratio_similarity(opposite_a, opposite_b, clamped=True)[0] == pytest.approx(0.0)

    def test_matcher_box_similarity(self):
        rng = np.random.default_rng(5)
        color = rng.integers(0, 256, size=(40, 40, 3)).astype(np.uint8)
        frame = RgbdFrame(color=color, depth=np.zeros((40, 40)))
        matcher = RSpatiogramMatcher()
        bb = BoundingBox(5, 5, 12, 12)
        reference = matcher.describe(frame, bb)
        assert matcher.box_similarity(frame, bb, reference) == pytest.approx(1.0)

    def test_matcher_rejects_box_outside_frame(self):
        frame = RgbdFrame(color=np.zeros((20, 20, 3), dtype=np.uint8), depth=np.zeros((20, 20)))
        with pytest.raises(ValueError, match="outside frame"):
            RSpatiogramMatcher().describe(frame, BoundingBox(15, 15, 10, 10))


def make_rspatiogram(counts, means, covariances=None, cells=1):
    """r-spatiogram construído à mão, com todos os pixels de cada bin na primeira sub-região."""
    counts = np.asarray(counts, dtype=np.float64)
    tallies = np.round(counts * 100).astype(np.int64)
    ratios = np.zeros((len(counts), cells))
    ratios[counts > 0, 0] = 1.0
    base = Spatiogram(
        counts=counts,
        means=np.asarray(means, dtype=np.float64),
        covariances=None if covariances is None else np.asarray(covariances, dtype=np.float64),
        tallies=tallies,
        region_shape=(10, 10),
    )
    cell_tallies = (ratios * tallies[:, None]).astype(np.int64)
    return RSpatiogram(base=base, ratios=ratios, cell_tallies=cell_tallies)


def permuted(desc, perm):
    base = desc.base
    return RSpatiogram(
        base=Spatiogram(
            counts=base.counts[perm],
            means=base.means[perm],
            covariances=None if base.covariances is None else base.covariances[perm],
            tallies=base.tallies[perm],
            region_shape=base.region_shape,
        ),
        ratios=desc.ratios[perm],
        cell_tallies=desc.cell_tallies[perm],
    )


def gaussian_pdf(x, mean, cov):
    delta = np.asarray(x) - np.asarray(mean)
    return math.exp(-0.5 * delta @ np.linalg.inv(cov) @ delta) / (
        2 * math.pi * math.sqrt(np.linalg.det(cov))
    )


class TestTwoBinReference:
    """rho on a two-bin, single-cell case evaluated term by term."""

    counts_a = [0.6, 0.4]
    counts_b = [0.5, 0.5]
    means_a = [[0.1, 0.2], [-0.3, 0.0]]
    means_b = [[0.0, 0.2], [-0.3, 0.4]]

    def test_isotropic_weight(self):
        a = make_rspatiogram(self.counts_a, self.means_a)
        b = make_rspatiogram(self.counts_b, self.means_b)
        sigma = 0.25
        expected = 0.0
        for n, m, mu, nu in zip(self.counts_a, self.counts_b, self.means_a, self.means_b):
            d2 = (mu[0] - nu[0]) ** 2 + (mu[1] - nu[1]) ** 2
            expected += math.sqrt(n * m) * math.exp(-d2 / (8 * sigma**2))
        assert rspatiogram_similarity(a, b, sigma=sigma) == pytest.approx(expected, rel=1e-12)

    def test_full_covariance_weight(self):
        cov_a = [[[0.04, 0.01], [0.01, 0.09]], [[0.02, 0.0], [0.0, 0.03]]]
        cov_b = [[[0.05, 0.0], [0.0, 0.05]], [[0.03, -0.01], [-0.01, 0.06]]]
        a = make_rspatiogram(self.counts_a, self.means_a, cov_a)
        b = make_rspatiogram(self.counts_b, self.means_b, cov_b)
        expected = 0.0
        for k in range(2):
            sa, sb = np.array(cov_a[k]), np.array(cov_b[k])
            weight = (
                8
                * math.pi
                * (np.linalg.det(sa) * np.linalg.det(sb)) ** 0.25
                * gaussian_pdf(self.means_a[k], self.means_b[k], 2 * (sa + sb))
            )
            expected += math.sqrt(self.counts_a[k] * self.counts_b[k]) * weight
        assert rspatiogram_similarity(a, b) == pytest.approx(expected, rel=1e-9)

    def test_bin_permutation_leaves_rho_unchanged(self):
        rng = np.random.default_rng(21)
        q = Quantizer(levels_per_channel=4)
        perm = rng.permutation(q.bin_count)
        for with_covariance in (False, True):
            for _ in range(50):
                regions = rng.integers(0, 256, size=(2, 12, 12, 3))
                a = compute_rspatiogram(regions[0], q, with_covariance=with_covariance)
                b = compute_rspatiogram(regions[1], q, with_covariance=with_covariance)
                rho = rspatiogram_similarity(a, b)
                rho_permuted = rspatiogram_similarity(permuted(a, perm), permuted(b, perm))
                assert rho_permuted == pytest.approx(rho, abs=1e-12)


class TestWorkedExamples:
    def test_uniform_two_by_two_grid(self):
        region = np.full((2, 2, 3), 10, dtype=np.uint8)
        desc = compute_rspatiogram(region, Quantizer(), SubregionGrid(2, 2))
        b = int(Quantizer().quantize(np.array([10, 10, 10])))
        assert list(desc.ratios[b]) == [0.25, 0.25, 0.25, 0.25]

    def test_half_split_ratios_score_zero(self):
        s = ratio_similarity(np.array([[0.5, 0.5, 0.0]]), np.array([[1.0, 0.0, 0.0]]))
        assert s[0] == pytest.approx(0.0)

    def test_ratio_shape_mismatch(self):
        with pytest.raises(ValueError, match="descriptor shape mismatch"):
            ratio_similarity(np.zeros((4, 9)), np.zeros((4, 4)))

    def test_depth_halves(self):
        depth = np.zeros((4, 8))
        depth[:, :4] = 50.0
        depth[:, 4:] = 200.0
        q = Quantizer(levels_per_channel=32, channel_count=1)
        spatiogram = depth_spatiogram(depth, q)
        assert np.flatnonzero(spatiogram.counts).tolist() == [6, 25]
        assert spatiogram.counts[6] == 0.5
        assert spatiogram.means[6] == pytest.approx([-0.5, 0.0])
        assert spatiogram.means[25] == pytest.approx([0.5, 0.0])
