import numpy as np
import pytest

from tvmar.degrade import NoiseSpec, add_noise, cap_sinogram
from tvmar.metrics import psnr


class TestCap:
    def test_above_max_is_identity(self, desk_case):
        sino = desk_case["sinogram"]
        capped, mask = cap_sinogram(sino, sino.values.max() + 1.0)
        assert np.array_equal(capped.values, sino.values)
        assert not mask.any()

    def test_idempotent_and_never_increases(self, desk_case):
        sino = desk_case["sinogram"]
        cap = desk_case["cap"]
        once, mask = cap_sinogram(sino, cap)
        twice, mask2 = cap_sinogram(once, cap)
        assert np.array_equal(once.values, twice.values)
        assert np.array_equal(mask, mask2)
        assert np.all(once.values <= sino.values)
        assert once.values.max() <= cap
        assert np.all(once.values[mask] == cap)

    def test_mask_confined_to_metal_rays(self, paper_case):
        # every capped entry's ray must pass near the metal block: compare
        # the bin offset with the block center's projected offset
        geom = paper_case["geometry"]
        mask = paper_case["mask"]
        insert = paper_case["insert"]
        assert mask.any()
        rows, cols = paper_case["truth"].shape
        cy = (rows - 1) / 2.0 - (insert.row0 + (insert.rows - 1) / 2.0)
        cx = (insert.col0 + (insert.cols - 1) / 2.0) - (cols - 1) / 2.0
        half_diag = 0.5 * np.hypot(insert.rows, insert.cols)
        a_idx, k_idx = np.nonzero(mask)
        phi = geom.angles[a_idx]
        s_center = -np.sin(phi) * cx + np.cos(phi) * cy
        s_bin = (k_idx - (geom.n_bins - 1) / 2.0) * geom.bin_spacing
        assert np.all(np.abs(s_bin - s_center) <= half_diag + 2.0)


class TestNoise:
    def test_zero_level_identity(self, desk_case):
        sino = desk_case["sinogram"]
        out = add_noise(sino, NoiseSpec(relative_level=0.0, rng_seed=7))
        assert np.array_equal(out.values, sino.values)

    def test_seed_determinism(self, desk_case):
        sino = desk_case["sinogram"]
        spec = NoiseSpec(relative_level=0.05, rng_seed=123)
        a = add_noise(sino, spec)
        b = add_noise(sino, spec)
        assert np.array_equal(a.values, b.values)
        c = add_noise(sino, NoiseSpec(relative_level=0.05, rng_seed=124))
        assert not np.array_equal(a.values, c.values)

    def test_empirical_std_matches_level(self, paper_case):
        sino = paper_case["sinogram"]  # 180 x 183 entries
        level = 0.05
        noisy = add_noise(sino, NoiseSpec(relative_level=level, rng_seed=11))
        measured = np.std(noisy.values - sino.values) / sino.values.max()
        assert measured == pytest.approx(level, rel=0.05)

    def test_mean_reference(self, desk_case):
        sino = desk_case["sinogram"]
        noisy = add_noise(sino, NoiseSpec(relative_level=0.1, rng_seed=5,
                                          reference="mean"))
        measured = np.std(noisy.values - sino.values)
        assert measured == pytest.approx(0.1 * sino.values.mean(), rel=0.05)

    def test_psnr_shift_consistent_with_level(self, paper_case):
        # with std = level * max and peak = max, the expected PSNR is
        # -20 log10(level), here 26.02 dB
        sino = paper_case["sinogram"]
        noisy = add_noise(sino, NoiseSpec(relative_level=0.05, rng_seed=3))
        measured = psnr(noisy.values, sino.values, peak=sino.values.max())
        assert measured == pytest.approx(-20 * np.log10(0.05), abs=1.0)

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            NoiseSpec(relative_level=-0.1)
        with pytest.raises(ValueError):
            NoiseSpec(reference="median")
