import numpy as np
import pytest

from tumorcheck import kernels


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    """Run the test once per available kernel backend."""
    prev = kernels.BACKEND
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def frame_hole_fixture():
    """9x9: dark 2-pixel frame on the border, bright square ring, dark 3x3 hole."""
    img = np.full((9, 9), 5, dtype=np.uint8)
    img[2:7, 2:7] = 200
    img[3:6, 3:6] = 5
    frame = np.zeros((9, 9), dtype=bool)
    frame[:2, :] = frame[-2:, :] = frame[:, :2] = frame[:, -2:] = True
    ring = np.zeros((9, 9), dtype=bool)
    ring[2:7, 2:7] = True
    ring[3:6, 3:6] = False
    hole = np.zeros((9, 9), dtype=bool)
    hole[3:6, 3:6] = True
    return img, frame, ring, hole


def planted_fixture(size=64):
    """Dark surround, bright brain disc, brighter blob strictly inside the disc."""
    yy, xx = np.mgrid[0:size, 0:size]
    c = (size - 1) / 2
    disc = (yy - c) ** 2 + (xx - c) ** 2 <= (0.4 * size) ** 2
    blob = (yy - c - 4) ** 2 + (xx - c + 3) ** 2 <= (0.1 * size) ** 2
    img = np.full((size, size), 4, dtype=np.uint8)
    img[disc] = 110
    img[blob] = 230
    return img, disc, blob
