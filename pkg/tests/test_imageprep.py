import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tumorcheck import imageprep as ip
from tumorcheck.errors import MalformedHeader, TruncatedData, UnsupportedMaxval

gray_images = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def test_load_ascii_pgm():
    img = ip.load_image(b"P2\n2 2\n255\n0 255 128 64")
    assert img.shape == (2, 2)
    assert img.ravel().tolist() == [0, 255, 128, 64]


def test_load_with_comments_and_binary():
    data = b"P5\n# a comment\n3 1\n# another\n255\n" + bytes([1, 2, 3])
    assert ip.load_image(data).tolist() == [[1, 2, 3]]


def test_truncated_binary():
    with pytest.raises(TruncatedData):
        ip.load_image(b"P5\n4 4\n255\n" + bytes(10))


def test_maxval_too_large():
    with pytest.raises(UnsupportedMaxval):
        ip.load_image(b"P5\n1 1\n65535\n" + bytes(2))


@pytest.mark.parametrize("data", [b"", b"P7\n1 1\n255\n0", b"P2\n1 x\n255\n0",
                                  b"P2\n0 1\n255\n", b"P2\n1 1\n10\n11"])
def test_malformed(data):
    with pytest.raises(MalformedHeader):
        ip.load_image(data)


def test_maxval_rescaled():
    assert ip.load_image(b"P2\n3 1\n4\n0 2 4").tolist() == [[0, 128, 255]]


def test_ppm_roundtrip(rng):
    img = rng.integers(0, 256, (5, 7, 3), dtype=np.uint8)
    for binary in (True, False):
        assert (ip.load_image(ip.encode_ppm(img, binary)) == img).all()


@given(gray_images, st.booleans())
def test_pgm_roundtrip(img, binary):
    assert (ip.load_image(ip.encode_pgm(img, binary)) == img).all()


def test_mask_written_as_0_255():
    out = ip.load_image(ip.encode_pgm(np.array([[True, False]])))
    assert out.tolist() == [[255, 0]]


@pytest.mark.parametrize("rgb,expected", [((255, 255, 255), 255), ((255, 0, 0), 76),
                                          ((0, 0, 0), 0)])
def test_grayscale_values(rgb, expected):
    img = np.array(rgb, dtype=np.uint8).reshape(1, 1, 3)
    assert ip.to_grayscale(img)[0, 0] == expected


@given(st.integers(0, 255))
def test_grayscale_of_gray_is_identity(g):
    img = np.full((2, 2, 3), g, dtype=np.uint8)
    assert (ip.to_grayscale(img) == g).all()


def test_enhance_maps_range():
    img = np.array([[50, 75, 100, 150]], dtype=np.uint8)
    out = ip.enhance(img)
    expected = [int(np.floor((p - 50) * 255 / 100 + 0.5)) for p in (50, 75, 100, 150)]
    assert out.ravel().tolist() == expected
    assert out.min() == 0 and out.max() == 255


def test_enhance_constant_unchanged():
    img = np.full((3, 4), 77, dtype=np.uint8)
    assert (ip.enhance(img) == img).all()


@given(gray_images)
def test_enhance_preserves_full_range_endpoints(img):
    img = img.copy()
    img.flat[0], img.flat[-1] = 0, 255
    if img.size < 2:
        return
    out = ip.enhance(img)
    assert (out == img).all()


def test_resize_large_slice():
    img = np.zeros((1427, 1275), dtype=np.uint8)
    assert ip.resize(img, 256, 256).shape == (256, 256)


def test_resize_identity(rng):
    img = rng.integers(0, 256, (256, 256), dtype=np.uint8)
    out = ip.resize(img, 256, 256)
    assert out.tobytes() == img.tobytes()


@given(st.integers(0, 255), st.integers(1, 20), st.integers(1, 20),
       st.integers(1, 20), st.integers(1, 20))
def test_resize_preserves_constants(c, h, w, oh, ow):
    out = ip.resize(np.full((h, w), c, dtype=np.uint8), ow, oh)
    assert out.shape == (oh, ow)
    assert (out == c).all()


def test_gaussian_weights_sum_to_one():
    k = ip.gaussian_kernel(3, 0.5)
    assert abs(k.sum() - 1.0) < 1e-12
    # hand-derived: exp(-2 d^2) weights with d^2 in {0, 1, 2}
    raw = np.exp(-2.0 * np.array([[2, 1, 2], [1, 0, 1], [2, 1, 2]]))
    assert np.allclose(k, raw / raw.sum(), atol=1e-15)


def test_smooth_impulse():
    img = np.zeros((3, 3), dtype=np.uint8)
    img[1, 1] = 255
    assert ip.smooth(img)[1, 1] == 158


@given(st.integers(0, 255), st.integers(1, 10), st.integers(1, 10))
def test_smooth_constant(c, h, w):
    img = np.full((h, w), c, dtype=np.uint8)
    assert (ip.smooth(img) == img).all()


def test_preprocess_color_and_gray(rng):
    gray = rng.integers(0, 200, (40, 30), dtype=np.uint8)
    out = ip.preprocess(gray, (16, 20))
    assert out.shape == (20, 16) and out.dtype == np.uint8
    color = np.stack([gray] * 3, axis=-1)
    assert (ip.preprocess(color, (16, 20)) == out).all()


@settings(max_examples=30)
@given(gray_images)
def test_preprocess_output_range(img):
    out = ip.preprocess(img, (8, 8))
    assert out.shape == (8, 8) and out.dtype == np.uint8
