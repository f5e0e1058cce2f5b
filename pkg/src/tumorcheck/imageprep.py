"""PGM/PPM decoding and the preprocessing chain (enhance, resize, grayscale, smooth).

Images are plain numpy arrays: grayscale is ``uint8`` of shape ``(h, w)``,
color is ``uint8`` of shape ``(h, w, 3)``. Rows come first, so a
"1427 rows by 1275 columns" image has shape ``(1427, 1275)``.
"""
import re

import numpy as np

from .errors import MalformedHeader, TruncatedData, UnsupportedMaxval

TARGET_SIZE = (256, 256)
SMOOTH_SIGMA = 0.5

_MAGICS = {b"P2": (1, False), b"P5": (1, True), b"P3": (3, False), b"P6": (3, True)}
_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def round_half_up(x):
    """Round to nearest integer, halves away from zero for non-negative input."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def _quantize(x):
    return np.clip(round_half_up(x), 0, 255).astype(np.uint8)


def is_gray(img):
    return isinstance(img, np.ndarray) and img.ndim == 2


def check_gray(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2D grayscale image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if img.min() < 0 or img.max() > 255:
            raise ValueError("grayscale intensities must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def _read_header(data, n_fields):
    fields = []
    pos = 0
    for _ in range(n_fields):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeader("header ended early")
        fields.append(m.group(1))
        pos = m.end()
    return fields, pos


def load_image(data):
    """Decode a PGM (P2/P5) or PPM (P3/P6) byte string.

    Returns a ``(h, w)`` array for PGM and ``(h, w, 3)`` for PPM.
    """
    if isinstance(data, str):
        data = data.encode("ascii")
    fields, pos = _read_header(data, 4)
    magic = fields[0]
    if magic not in _MAGICS:
        raise MalformedHeader(f"unknown magic number {magic!r}")
    channels, binary = _MAGICS[magic]
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise MalformedHeader("width, height and maxval must be integers") from None
    if width < 1 or height < 1 or maxval < 1:
        raise MalformedHeader(f"invalid dimensions {width}x{height} or maxval {maxval}")
    if maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} exceeds 255")
    count = width * height * channels

    if binary:
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise TruncatedData("missing raster data")
        raster = data[pos + 1:pos + 1 + count]
        if len(raster) < count:
            raise TruncatedData(f"expected {count} samples, found {len(raster)}")
        samples = np.frombuffer(raster, dtype=np.uint8).astype(np.int64)
    else:
        text = re.sub(rb"#[^\n]*", b"", data[pos:])
        try:
            samples = np.array([int(t) for t in text.split()[:count]], dtype=np.int64)
        except ValueError:
            raise MalformedHeader("non-integer sample in ASCII raster") from None
        if samples.size < count:
            raise TruncatedData(f"expected {count} samples, found {samples.size}")

    if samples.size and samples.max() > maxval:
        raise MalformedHeader(f"sample exceeds declared maxval {maxval}")
    if maxval != 255:
        samples = round_half_up(samples * 255.0 / maxval)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return samples.astype(np.uint8).reshape(shape)


def read_image(path):
    with open(path, "rb") as fh:
        return load_image(fh.read())


def encode_pgm(img, binary=False):
    """Encode a grayscale image (or boolean mask, as 0/255) as P2 or P5."""
    img = np.asarray(img)
    if img.dtype == bool:
        img = img.astype(np.uint8) * 255
    img = check_gray(img)
    h, w = img.shape
    if binary:
        return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()
    lines = [" ".join(str(v) for v in row) for row in img.tolist()]
    return ("P2\n%d %d\n255\n" % (w, h) + "\n".join(lines) + "\n").encode("ascii")


def encode_ppm(img, binary=True):
    img = np.asarray(img, dtype=np.uint8)
    h, w, _ = img.shape
    if binary:
        return b"P6\n%d %d\n255\n" % (w, h) + img.tobytes()
    flat = " ".join(str(v) for v in img.reshape(-1).tolist())
    return ("P3\n%d %d\n255\n" % (w, h) + flat + "\n").encode("ascii")


def write_pgm(path, img, binary=False):
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img, binary=binary))


def to_grayscale(img):
    """Luminance ``0.299 R + 0.587 G + 0.114 B``, rounded and clamped."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (h, w, 3) color image, got shape {img.shape}")
    rgb = img.astype(np.float64)
    lum = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return _quantize(lum)


def enhance(img):
    """Linear contrast stretch of [min, max] onto [0, 255].

    A constant image is returned unchanged.
    """
    img = check_gray(img)
    lo, hi = int(img.min()), int(img.max())
    if lo == hi:
        return img.copy()
    return _quantize((img.astype(np.float64) - lo) * 255.0 / (hi - lo))


def resize(img, out_w, out_h):
    """Bilinear resize with pixel-center alignment.

    Same-size input is returned bit-identical.
    """
    img = check_gray(img)
    if out_w < 1 or out_h < 1:
        raise ValueError("output size must be at least 1x1")
    h, w = img.shape
    if (h, w) == (out_h, out_w):
        return img.copy()

    def axis(n_in, n_out):
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0, n_in - 1)
        i0 = np.floor(src).astype(np.intp)
        i1 = np.minimum(i0 + 1, n_in - 1)
        return i0, i1, src - i0

    r0, r1, fr = axis(h, out_h)
    c0, c1, fc = axis(w, out_w)
    f = img.astype(np.float64)
    fr = fr[:, None]
    top = f[r0][:, c0] * (1 - fc) + f[r0][:, c1] * fc
    bottom = f[r1][:, c0] * (1 - fc) + f[r1][:, c1] * fc
    return _quantize(top * (1 - fr) + bottom * fr)


def gaussian_kernel(size=3, sigma=SMOOTH_SIGMA):
    """Normalized ``size x size`` Gaussian kernel."""
    half = size // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    d2 = ax[:, None] ** 2 + ax[None, :] ** 2
    k = np.exp(-d2 / (2.0 * sigma * sigma))
    return k / k.sum()


def smooth(img, sigma=SMOOTH_SIGMA):
    """3x3 Gaussian smoothing with replicate-border padding."""
    img = check_gray(img)
    k = gaussian_kernel(3, sigma)
    padded = np.pad(img.astype(np.float64), 1, mode="edge")
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.float64)
    for dr in range(3):
        for dc in range(3):
            out += k[dr, dc] * padded[dr:dr + h, dc:dc + w]
    return _quantize(out)


def _per_channel(fn, img, *args):
    if is_gray(img):
        return fn(img, *args)
    return np.stack([fn(np.ascontiguousarray(img[..., c]), *args) for c in range(3)], axis=-1)


def preprocess(img, size=TARGET_SIZE, sigma=SMOOTH_SIGMA):
    """Full chain in pipeline order: enhance, resize, grayscale, smooth.

    ``size`` is ``(width, height)``. Color input is enhanced and resized per
    channel before the grayscale conversion.
    """
    out_w, out_h = size
    img = _per_channel(enhance, img)
    img = _per_channel(resize, img, out_w, out_h)
    if not is_gray(img):
        img = to_grayscale(img)
    return smooth(img, sigma)
