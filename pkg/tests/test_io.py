import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from maskforge import (
    BBox,
    Instance,
    RleError,
    RleMask,
    Scene,
    load_scene,
    rle_decode,
    rle_encode,
    save_scene,
    synth_corpus,
    tight_bbox,
    write_pbm,
)
from maskforge.scenes import SceneFormatError, scene_from_dict, scene_to_dict
from oracles import random_mask

binary_masks = hnp.arrays(
    np.uint8, st.tuples(st.integers(1, 16), st.integers(1, 16)),
    elements=st.sampled_from([0, 1]),
)


def naive_column_major_decode(counts, h, w):
    """Independent decoder: expand runs and fill column by column."""
    bits = []
    val = 0
    for c in counts:
        bits.extend([val] * c)
        val = 1 - val
    out = np.zeros((h, w), np.uint8)
    idx = 0
    for col in range(w):
        for row in range(h):
            out[row, col] = bits[idx]
            idx += 1
    return out


class TestRle:
    def test_diagonal_example(self):
        r = rle_encode([[1, 0], [0, 1]])
        assert r.size == (2, 2) and r.counts == (0, 1, 2, 1)
        np.testing.assert_array_equal(
            naive_column_major_decode(r.counts, 2, 2), [[1, 0], [0, 1]])

    def test_all_zeros(self):
        assert rle_encode(np.zeros((3, 5), np.uint8)).counts == (15,)

    def test_all_ones(self):
        assert rle_encode(np.ones((3, 5), np.uint8)).counts == (0, 15)

    def test_decode_all_ones(self):
        np.testing.assert_array_equal(
            rle_decode(RleMask((2, 2), (0, 4))), np.ones((2, 2), np.uint8))

    def test_short_counts_rejected(self):
        with pytest.raises(RleError, match="index"):
            rle_decode(RleMask((2, 2), (0, 3)))

    def test_negative_count_rejected(self):
        with pytest.raises(RleError, match="index 1"):
            rle_decode(RleMask((2, 2), (5, -1)))

    @given(binary_masks)
    @settings(max_examples=300)
    def test_round_trip(self, m):
        np.testing.assert_array_equal(rle_decode(rle_encode(m)), m)

    def test_round_trip_bulk(self):
        rng = np.random.default_rng(12)
        for _ in range(500):
            h, w = rng.integers(1, 24, size=2)
            m = random_mask(rng, h, w)
            r = rle_encode(m)
            np.testing.assert_array_equal(rle_decode(r), m)
            np.testing.assert_array_equal(
                naive_column_major_decode(r.counts, h, w), m)


class TestSceneFiles:
    def _scene(self, rng):
        insts = []
        for i in range(2):
            m = random_mask(rng, 12, 12)
            if not m.any():
                m[4:8, 4:8] = 1
            insts.append(Instance(id=i, category="blob", bbox=tight_bbox(m),
                                  mask=m, score=float(rng.random())))
        return Scene(image_size=(12, 12), instances=insts)

    def test_read_write_read_fixed_point(self, tmp_path):
        rng = np.random.default_rng(13)
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        save_scene(self._scene(rng), str(p1))
        save_scene(load_scene(str(p1)), str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_scores_six_decimals(self, tmp_path):
        m = np.ones((4, 4), np.uint8)
        scene = Scene((4, 4), [Instance(0, "x", tight_bbox(m), m, score=0.123456789)])
        d = scene_to_dict(scene)
        assert d["instances"][0]["score"] == 0.123457

    def test_prob_field_round_trips(self):
        m = np.ones((4, 4), np.uint8)
        prob = np.round(np.random.default_rng(0).random((4, 4)), 6)
        scene = Scene((4, 4), [Instance(0, "x", tight_bbox(m), m, prob=prob)])
        back = scene_from_dict(json.loads(json.dumps(scene_to_dict(scene))))
        np.testing.assert_allclose(back.instances[0].prob, prob)

    def test_mismatched_mask_size_rejected(self):
        d = {"image_size": [4, 4], "instances": [{
            "id": 0, "category": "x", "bbox": [0, 0, 2, 2],
            "mask": {"size": [2, 2], "counts": [0, 4]}}]}
        with pytest.raises(SceneFormatError):
            scene_from_dict(d)

    def test_missing_field_rejected(self):
        with pytest.raises(SceneFormatError):
            scene_from_dict({"instances": []})


class TestPbm:
    def test_p1_format(self, tmp_path):
        p = tmp_path / "m.pbm"
        write_pbm([[1, 0], [0, 1]], str(p))
        assert p.read_text() == "P1\n2 2\n1 0\n0 1\n"


class TestSynthCorpus:
    def test_same_seed_bit_identical(self, tmp_path):
        a = synth_corpus(42, 5)
        b = synth_corpus(42, 5)
        assert len(a) == len(b) == 5
        for sa, sb in zip(a, b):
            assert json.dumps(scene_to_dict(sa)) == json.dumps(scene_to_dict(sb))

    def test_different_seeds_differ(self):
        a = synth_corpus(1, 3)
        b = synth_corpus(2, 3)
        assert any(json.dumps(scene_to_dict(x)) != json.dumps(scene_to_dict(y))
                   for x, y in zip(a, b))

    def test_zero_scenes_rejected(self):
        with pytest.raises(ValueError):
            synth_corpus(0, 0)

    def test_foreground_fraction_reasonable(self):
        scenes = synth_corpus(7, 20)
        total_fg = 0
        total_px = 0
        for s in scenes:
            for inst in s.instances:
                total_fg += int(inst.mask.sum())
                total_px += inst.mask.size
                assert inst.mask.any()
        frac = total_fg / total_px
        assert 0.02 < frac < 0.8

    def test_shape_mix_present(self):
        cats = {i.category for s in synth_corpus(3, 30) for i in s.instances}
        assert {"disk", "rectangle", "bar", "blob"} <= cats

    def test_bboxes_tight(self):
        for s in synth_corpus(5, 5):
            for inst in s.instances:
                assert inst.bbox == tight_bbox(inst.mask)
