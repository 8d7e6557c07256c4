import numpy as np
import pytest

from tvmar import Geometry, add_metal, cap_sinogram, project, shepp_logan
from tvmar.phantom import default_metal_insert


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def desk_case():
    """64x64 phantom with a 5x5 metal block, 180 angles, cap saturating
    exactly the metal rays (midway between clean and metal sinogram peaks)."""
    plain = shepp_logan(64, 64)
    insert = default_metal_insert(64, 64, rows=5, cols=5, added_value=3.0)
    truth = add_metal(plain, insert)
    geom = Geometry.uniform(180, img_shape=(64, 64))
    sino_plain = project(plain, geom)
    sino = project(truth, geom)
    cap = 0.5 * (sino_plain.values.max() + sino.values.max())
    capped, mask = cap_sinogram(sino, cap)
    return {
        "truth": truth,
        "insert": insert,
        "geometry": geom,
        "sinogram": sino,
        "capped": capped,
        "mask": mask,
        "cap": cap,
    }


@pytest.fixture(scope="session")
def paper_case():
    """128x128 phantom with the 10x10 block of 3.0, 180 angles, cap 45."""
    plain = shepp_logan(128, 128)
    insert = default_metal_insert(128, 128)
    truth = add_metal(plain, insert)
    geom = Geometry.uniform(180, img_shape=(128, 128))
    sino = project(truth, geom)
    capped, mask = cap_sinogram(sino, 45.0)
    return {
        "truth": truth,
        "insert": insert,
        "geometry": geom,
        "sinogram": sino,
        "capped": capped,
        "mask": mask,
        "cap": 45.0,
    }
