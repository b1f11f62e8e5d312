import numpy as np
import pytest

from conftest import disk_mask, label_components_bfs, make_disk_image, make_split_scene
from spotid import segmentation as seg
from spotid.errors import InvalidParameterError


class TestParams:
    def test_defaults_valid(self):
        seg.SegmentationParams().validate()

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"median_window": 4},
            {"gamma": 0},
            {"cv_lambda1": 0},
            {"cv_iterations": 0},
            {"area_min": 100, "area_max": 50},
            {"cv_tol": -1},
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(InvalidParameterError):
            seg.SegmentationParams(**kwargs).validate()

    def test_dict_roundtrip(self):
        p = seg.SegmentationParams(gamma=1.8, area_min=20)
        assert seg.SegmentationParams.from_dict(p.to_dict()) == p

    def test_unknown_key_rejected(self):
        with pytest.raises(InvalidParameterError):
            seg.SegmentationParams.from_dict({"bogus": 1})


class TestActiveContours:
    def test_uniform_image_terminates(self):
        mask = seg.active_contours(np.full((32, 32), 0.5), seg.SegmentationParams())
        assert mask.shape == (32, 32)

    def test_disk_iou(self):
        img, truth = make_disk_image()
        mask = seg.active_contours(img, seg.SegmentationParams())
        iou = (mask & truth).sum() / (mask | truth).sum()
        assert iou >= 0.95

    def test_two_disks_two_components(self):
        truth = disk_mask((64, 64), 16, 16, 8) | disk_mask((64, 64), 48, 48, 8)
        img = np.where(truth, 0.9, 0.1)
        mask = seg.active_contours(img, seg.SegmentationParams())
        _, n = label_components_bfs(mask)
        assert n == 2

    def test_terminates_within_iteration_cap(self, rng):
        img = rng.uniform(size=(48, 48))
        params = seg.SegmentationParams(cv_iterations=5, cv_tol=0.0)
        seg.active_contours(img, params)  # must not hang or raise

    def test_deterministic(self):
        img, _ = make_disk_image()
        p = seg.SegmentationParams()
        assert np.array_equal(seg.active_contours(img, p), seg.active_contours(img, p))


class TestAreaOpen:
    def test_empty_mask(self):
        out = seg.area_open(np.zeros((10, 10), bool), 2, 10)
        assert not out.any()

    def test_band_filters_components(self):
        mask = np.zeros((100, 100), bool)
        mask[0, :3] = True  # size 3
        mask[10:15, 10:20] = True  # size 50
        mask[30:80, 30:80] = True  # size 2500
        out = seg.area_open(mask, 10, 1000)
        labels, n = label_components_bfs(out)
        assert n == 1
        assert out.sum() == 50

    def test_identity_when_all_inside_band(self):
        mask = disk_mask((40, 40), 10, 10, 4) | disk_mask((40, 40), 30, 30, 5)
        assert np.array_equal(seg.area_open(mask, 1, 10000), mask)

    def test_idempotent_and_antiextensive(self, rng):
        mask = rng.uniform(size=(40, 40)) > 0.7
        once = seg.area_open(mask, 3, 60)
        twice = seg.area_open(once, 3, 60)
        assert np.array_equal(once, twice)
        assert not (once & ~mask).any()

    def test_invalid_band(self):
        with pytest.raises(InvalidParameterError):
            seg.area_open(np.zeros((5, 5), bool), 10, 10)


class TestSegmentScale:
    def test_all_black_image(self):
        img = np.zeros((32, 32, 3))
        result = seg.segment_scale(img, seg.SegmentationParams())
        assert not result.mask.any()

    def test_merge_is_or_of_threads(self, rng):
        rgb, _, _ = make_split_scene(seed=3)
        result = seg.segment_scale(rgb)
        assert np.array_equal(
            result.mask, result.dark_thread_mask | result.bright_thread_mask
        )

    def test_split_scene_recall(self):
        rgb, gt, dark_side = make_split_scene(seed=1)
        result = seg.segment_scale(rgb)
        recall = (result.mask & gt).sum() / gt.sum()
        assert recall >= 0.8
        for side in (dark_side, ~dark_side):
            side_gt = gt & side
            assert (result.mask & side_gt).sum() / side_gt.sum() >= 0.8

    def test_deterministic(self):
        rgb, _, _ = make_split_scene(seed=2)
        a = seg.segment_scale(rgb)
        b = seg.segment_scale(rgb)
        assert np.array_equal(a.mask, b.mask)
        assert np.array_equal(a.dark_thread_mask, b.dark_thread_mask)

    def test_thread_masks_subset_of_merge(self):
        rgb, _, _ = make_split_scene(seed=4)
        r = seg.segment_scale(rgb)
        assert not (r.dark_thread_mask & ~r.mask).any()
        assert not (r.bright_thread_mask & ~r.mask).any()
