import math

import numpy as np
import pytest

from tvmar.phantom import (Image, MetalInsert, add_metal,
                           default_metal_insert, shepp_logan, _ELLIPSES)


def point_value(x, y):
    """Independent scalar evaluation of the phantom definition at (x, y):
    sum of intensities of every ellipse containing the point, clipped."""
    total = 0.0
    for intensity, a, b, x0, y0, phi_deg in _ELLIPSES:
        phi = math.radians(phi_deg)
        xr = (x - x0) * math.cos(phi) + (y - y0) * math.sin(phi)
        yr = -(x - x0) * math.sin(phi) + (y - y0) * math.cos(phi)
        if (xr / a) ** 2 + (yr / b) ** 2 <= 1.0:
            total += intensity
    return min(max(total, 0.0), 1.0)


def pixel_center(i, j, rows, cols):
    return (2.0 * j + 1.0 - cols) / cols, -(2.0 * i + 1.0 - rows) / rows


class TestSheppLogan:
    def test_value_range_and_corners(self):
        img = shepp_logan(128, 128)
        assert img.values.min() >= 0.0
        assert img.values.max() <= 1.0
        for corner in ((0, 0), (0, -1), (-1, 0), (-1, -1)):
            assert img.values[corner] == 0.0

    def test_deterministic(self):
        a = shepp_logan(128, 128)
        b = shepp_logan(128, 128)
        assert np.array_equal(a.values, b.values)

    def test_matches_pointwise_ellipse_evaluation(self):
        img = shepp_logan(64, 64)
        # pixels at and around the geometric center, plus a spread of others
        probes = [(32, 32), (31, 31), (20, 32), (32, 20), (40, 40), (10, 32)]
        for i, j in probes:
            x, y = pixel_center(i, j, 64, 64)
            assert img.values[i, j] == pytest.approx(point_value(x, y), abs=1e-15)

    def test_interior_structure_present(self):
        img = shepp_logan(64, 64)
        assert img.values.max() == 1.0          # skull ring
        interior = img.values[20:44, 20:44]
        assert interior.std() > 0.01            # features, not a flat disk

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            shepp_logan(7, 128)
        with pytest.raises(ValueError):
            shepp_logan(128, 4)


class TestAddMetal:
    def test_block_raises_values(self):
        img = shepp_logan(128, 128)
        out = add_metal(img, default_metal_insert(128, 128))
        region = out.values[59:69, 85:95]
        assert region.min() >= 3.0
        assert out.values.max() >= 3.0

    def test_zero_insert_is_identity(self):
        img = shepp_logan(32, 32)
        out = add_metal(img, MetalInsert(5, 5, 1, 1, 0.0))
        assert np.array_equal(out.values, img.values)

    def test_sum_increase_matches_area_times_value(self):
        img = shepp_logan(64, 64)
        insert = MetalInsert(10, 12, 7, 9, 2.5)
        out = add_metal(img, insert)
        assert out.values.sum() - img.values.sum() == pytest.approx(
            7 * 9 * 2.5, rel=1e-12)

    def test_additive(self):
        img = shepp_logan(32, 32)
        insert = MetalInsert(8, 8, 4, 4, 1.5)
        twice = add_metal(add_metal(img, insert), insert)
        region = twice.values[8:12, 8:12] - img.values[8:12, 8:12]
        assert np.allclose(region, 3.0, atol=1e-14)

    def test_out_of_bounds_rejected(self):
        img = shepp_logan(32, 32)
        with pytest.raises(ValueError):
            add_metal(img, MetalInsert(30, 0, 5, 5, 1.0))
        with pytest.raises(ValueError):
            add_metal(img, MetalInsert(0, 28, 5, 5, 1.0))

    def test_negative_value_rejected(self):
        with pytest.raises(ValueError):
            MetalInsert(0, 0, 2, 2, -1.0)


class TestImage:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Image(np.array([[np.nan]]))
        with pytest.raises(ValueError):
            Image(np.zeros((4, 4)), h=0.0)
        with pytest.raises(ValueError):
            Image(np.zeros(4))

    def test_accessors(self):
        img = Image(np.zeros((3, 5)), h=2.0)
        assert img.height == 3
        assert img.width == 5
        assert img.shape == (3, 5)
