import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from maskforge import (
    BBox,
    ShapeMismatchError,
    binarize,
    crop_resize_gt,
    mask_iou,
    upsample2x_bilinear,
    upsample2x_binary,
)
from oracles import bilinear_point_oracle, random_mask

prob_masks = hnp.arrays(
    np.float64,
    st.tuples(st.integers(1, 12), st.integers(1, 12)),
    elements=st.floats(0, 1, allow_nan=False),
)
binary_masks = hnp.arrays(
    np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)),
    elements=st.sampled_from([0, 1]),
)


class TestUpsampleBilinear:
    def test_constant_is_fixed_point(self):
        out = upsample2x_bilinear(np.full((1, 1), 0.7))
        assert out.shape == (2, 2)
        np.testing.assert_allclose(out, 0.7)

    def test_hand_evaluated_rows(self):
        # sampling a vertical 0->1 step at row centers -0.25, .25, .75, 1.25
        out = upsample2x_bilinear([[0, 0], [1, 1]])
        expected = np.array([[0, 0], [0.25, 0.25], [0.75, 0.75], [1, 1]])
        np.testing.assert_allclose(out, np.repeat(expected, 2, axis=1)[:, :4])

    def test_matches_point_oracle(self):
        rng = np.random.default_rng(7)
        m = rng.random((5, 4))
        out = upsample2x_bilinear(m)
        for i in range(10):
            for j in range(8):
                expected = bilinear_point_oracle(m, (i + 0.5) / 2 - 0.5, (j + 0.5) / 2 - 0.5)
                assert out[i, j] == pytest.approx(expected, abs=1e-12)

    @given(prob_masks)
    @settings(max_examples=200)
    def test_bounds_preserved(self, m):
        out = upsample2x_bilinear(m)
        assert out.shape == (2 * m.shape[0], 2 * m.shape[1])
        assert out.min() >= m.min() - 1e-12
        assert out.max() <= m.max() + 1e-12

    def test_bounds_on_many_random_masks(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            h, w = rng.integers(1, 20, size=2)
            m = rng.random((h, w))
            out = upsample2x_bilinear(m)
            assert m.min() - 1e-12 <= out.min() and out.max() <= m.max() + 1e-12


class TestUpsampleBinary:
    def test_all_ones(self):
        out = upsample2x_binary(np.ones((3, 5), np.uint8))
        assert out.shape == (6, 10) and out.all()

    def test_all_zeros(self):
        assert not upsample2x_binary(np.zeros((4, 4), np.uint8)).any()

    def test_composes_bilinear_and_threshold(self):
        m = np.array([[1, 0], [0, 0]], np.uint8)
        expected = binarize(upsample2x_bilinear(m.astype(float)), 0.5)
        np.testing.assert_array_equal(upsample2x_binary(m), expected)

    @given(binary_masks)
    @settings(max_examples=100)
    def test_rebinarization_idempotent(self, m):
        up = upsample2x_binary(m)
        np.testing.assert_array_equal(binarize(up.astype(float), 0.5), up)


class TestBinarize:
    def test_ge_convention(self):
        np.testing.assert_array_equal(binarize([[0.49, 0.5, 0.51]], 0.5), [[0, 1, 1]])

    def test_all_zero(self):
        assert not binarize(np.zeros((3, 3)), 0.5).any()

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        m = rng.random((8, 8))
        b = binarize(m, 0.5)
        np.testing.assert_array_equal(binarize(b.astype(float), 0.5), b)

    def test_threshold_domain(self):
        with pytest.raises(ValueError):
            binarize(np.zeros((2, 2)), 0.0)
        with pytest.raises(ValueError):
            binarize(np.zeros((2, 2)), 1.0)


class TestMaskIou:
    def test_identical(self):
        m = np.eye(4, dtype=np.uint8)
        assert mask_iou(m, m) == 1.0

    def test_disjoint(self):
        a = np.zeros((4, 4), np.uint8)
        b = np.zeros((4, 4), np.uint8)
        a[0, 0] = 1
        b[3, 3] = 1
        assert mask_iou(a, b) == 0.0

    def test_half_rectangles(self):
        top = np.zeros((4, 4), np.uint8)
        top[:2, :] = 1
        left = np.zeros((4, 4), np.uint8)
        left[:, :2] = 1
        assert mask_iou(top, left) == pytest.approx(4 / 12)

    def test_empty_empty_convention(self):
        z = np.zeros((5, 5), np.uint8)
        assert mask_iou(z, z) == 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            mask_iou(np.zeros((2, 2), np.uint8), np.zeros((3, 3), np.uint8))

    @given(binary_masks, st.integers(0, 2**31))
    @settings(max_examples=100)
    def test_symmetric_and_bounded(self, a, seed):
        b = (np.random.default_rng(seed).random(a.shape) < 0.5).astype(np.uint8)
        v = mask_iou(a, b)
        assert v == mask_iou(b, a)
        assert 0.0 <= v <= 1.0
        if a.any() or b.any():
            assert (v == 1.0) == bool((a == b).all())


class TestCropResizeGt:
    def test_identity_box(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = random_mask(rng, 9, 9)
            out = crop_resize_gt(m, BBox(0, 0, 9, 9), 9)
            np.testing.assert_array_equal(out, m)

    def test_uniform_foreground_inside_box(self):
        # foreground extends past the box so every bilinear sample reads 1
        m = np.zeros((16, 16), np.uint8)
        m[3:13, 3:13] = 1
        out = crop_resize_gt(m, BBox(4, 4, 12, 12), 28)
        assert out.all()

    def test_disk_matches_point_sampling_oracle(self):
        yy, xx = np.mgrid[0:8, 0:8]
        disk = (((yy - 3.5) ** 2 + (xx - 3.5) ** 2) <= 9).astype(np.uint8)
        box = BBox(1, 1, 7, 7)
        out = crop_resize_gt(disk, box, 28)
        f = disk.astype(float)
        for i in range(28):
            for j in range(28):
                fy = box.y0 + (i + 0.5) * box.height / 28 - 0.5
                fx = box.x0 + (j + 0.5) * box.width / 28 - 0.5
                assert out[i, j] == (1 if bilinear_point_oracle(f, fy, fx) >= 0.5 else 0)

    def test_degenerate_box_rejected(self):
        with pytest.raises(ValueError):
            BBox(2, 2, 2, 5)

    def test_non_intersecting_box_rejected(self):
        with pytest.raises(ValueError):
            crop_resize_gt(np.ones((4, 4), np.uint8), BBox(10, 10, 12, 12), 14)
