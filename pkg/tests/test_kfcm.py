import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.metrics import adjusted_rand_score

from tumorcheck import kfcm as K
from tumorcheck.errors import DegenerateInput, DimensionMismatch, IndexOutOfRange


def two_blob(h=16, w=16):
    img = np.full((h, w), 40, dtype=np.uint8)
    img[:, w // 2:] = 200
    return img


def assert_run_invariants(img, **kw):
    """Run kfcm with a callback and check the per-iteration invariants."""
    seen = []

    def cb(it, u, centers, obj):
        assert u.shape == (len(centers), img.size)
        assert np.abs(u.sum(axis=0) - 1).max() <= 1e-9
        assert (u >= 0).all()
        seen.append(obj)

    part = K.kfcm(img, callback=cb, **kw)
    assert seen
    trace = part.objective_trace
    for a, b in zip(trace, trace[1:]):
        assert b <= a + 1e-6 * abs(a)
    assert np.abs(part.memberships.sum(axis=0) - 1).max() <= 1e-9
    return part


@pytest.mark.parametrize("init", K.INITS)
def test_two_blob_fixture(init):
    img = two_blob()
    part = assert_run_invariants(img, k=2, seed=0, init=init)
    assert np.allclose(np.sort(part.centers), [40, 200], atol=1)
    truth = (img == 200).ravel()
    hard = np.argmax(part.memberships, axis=0)
    assert adjusted_rand_score(truth, hard) == 1.0
    match = np.where(truth, np.argmax(part.centers), np.argmin(part.centers))
    assert (part.memberships[match, np.arange(img.size)] >= 0.99).all()
    assert part.converged


def test_single_cluster():
    img = np.arange(20, dtype=np.uint8).reshape(4, 5) * 10
    part = K.kfcm(img, k=1)
    assert (part.memberships == 1).all()
    x = img.astype(float).ravel()
    kern = np.exp(-((x - part.centers[0]) ** 2) / K.DEFAULT_SIGMA ** 2)
    assert abs(part.centers[0] - (kern @ x) / kern.sum()) < 1e-6
    assert len(part.objective_trace) >= 1
    assert (K.label_segments(part).labels == 25).all()


@settings(max_examples=25, deadline=None)
@given(arrays(np.uint8, (8, 8)), st.integers(1, 4), st.integers(0, 2**16),
       st.sampled_from(K.INITS))
def test_invariants_random_images(img, k, seed, init):
    if k > 1 and len(np.unique(img)) < k:
        with pytest.raises(DegenerateInput):
            K.kfcm(img, k=k)
        return
    assert_run_invariants(img, k=k, seed=seed, init=init)


def test_invariants_phantom():
    from tumorcheck.synth import phantom
    img, _ = phantom(np.random.default_rng(5), True, 96)
    part = assert_run_invariants(img, k=4, seed=1, init="memberships")
    assert part.objective_trace[0] > part.objective_trace[-1]


def test_deterministic():
    img = np.random.default_rng(0).integers(0, 256, (12, 12), dtype=np.uint8)
    a = K.kfcm(img, k=3, seed=9, n_init=2, init="kmeans++")
    b = K.kfcm(img, k=3, seed=9, n_init=2, init="kmeans++")
    assert (a.memberships == b.memberships).all() and a.objective_trace == b.objective_trace


def test_n_init_keeps_lowest_objective():
    img = np.random.default_rng(1).integers(0, 256, (10, 10), dtype=np.uint8)
    best = K.kfcm(img, k=3, seed=4, n_init=3)
    singles = [K.kfcm(img, k=3, seed=s) for s in np.random.SeedSequence(4).spawn(3)]
    assert best.objective_trace[-1] == min(p.objective_trace[-1] for p in singles)


def test_max_iter_not_an_error():
    img = np.random.default_rng(2).integers(0, 256, (10, 10), dtype=np.uint8)
    part = K.kfcm(img, k=4, max_iter=2, tol=1e-12)
    assert len(part.objective_trace) == 2 and not part.converged


@pytest.mark.parametrize("kw", [dict(k=0), dict(m=1.0), dict(kernel_sigma=0), dict(init="x")])
def test_bad_parameters(kw):
    with pytest.raises(ValueError):
        K.kfcm(two_blob(), **kw)


def test_degenerate_input():
    with pytest.raises(DegenerateInput):
        K.kfcm(two_blob(), k=3)


def test_print_trace_format():
    part = K.FuzzyPartition(np.ones((1, 1)), np.array([1.0]), [98765432.123456, 2.5], (1, 1))
    buf = io.StringIO()
    K.print_trace(part, buf)
    assert buf.getvalue().splitlines() == [
        "Iteration count = 1, obj. fcn = 98765432.123456",
        "Iteration count = 2, obj. fcn = 2.500000",
    ]


# labeling and regions

def test_two_blob_labels():
    img = two_blob()
    seg = K.label_segments(K.kfcm(img, k=2))
    assert (seg.labels[:, :8] == 25).all() and (seg.labels[:, 8:] == 50).all()


def test_four_cluster_levels():
    rng = np.random.default_rng(3)
    img = rng.choice([10, 80, 150, 240], (20, 20)).astype(np.uint8)
    seg = K.label_segments(K.kfcm(img, k=4, init="kmeans++"))
    assert set(np.unique(seg.labels)) == {25, 50, 100, 150}
    order = [img[seg.labels == lv].mean() for lv in K.GRAY_LEVELS]
    assert order == sorted(order)


def test_split_single_label():
    img = np.arange(16, dtype=np.uint8).reshape(4, 4)
    seg = K.SegmentImage(np.full((4, 4), 50, dtype=np.uint8), 4)
    rs = K.split_regions(seg, img)
    assert rs.regions[1].all()
    assert not any(rs.regions[i].any() for i in (0, 2, 3))


@given(arrays(np.uint8, (8, 8)), arrays(np.uint8, (8, 8), elements=st.sampled_from(K.GRAY_LEVELS)))
def test_split_partition(img, labels):
    rs = K.split_regions(K.SegmentImage(labels, 4), img)
    total = np.sum([r.astype(int) for r in rs.regions], axis=0)
    assert (total == 1).all()
    for region, masked in zip(rs.regions, rs.masked_images):
        for (r, c), v in np.ndenumerate(masked):
            assert v == (img[r, c] if region[r, c] else 0)
    assert (rs.labels() == labels).all()


def test_split_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        K.split_regions(K.SegmentImage(np.zeros((2, 2), np.uint8), 4), np.zeros((3, 3), np.uint8))


def auto_fixture():
    labels = np.full((12, 12), 25, dtype=np.uint8)
    labels[:, 6:] = 50
    labels[0, :] = 100
    labels[4:8, 3:7] = 150
    img = np.select([labels == 25, labels == 50, labels == 100, labels == 150],
                    [10, 60, 250, 220]).astype(np.uint8)
    return K.split_regions(K.SegmentImage(labels, 4), img)


def test_select_examples():
    rs = auto_fixture()
    assert K.auto_index(rs) == 4
    assert (K.select_region(rs, K.AUTO) == rs.regions[3]).all()
    assert (K.select_region(rs, 3) == rs.regions[2]).all()
    with pytest.raises(IndexOutOfRange):
        K.select_region(rs, 5)
    with pytest.raises(IndexOutOfRange):
        K.select_region(rs, 0)


def test_auto_falls_back_to_brightest():
    labels = np.full((4, 4), 25, dtype=np.uint8)
    labels[:, 2:] = 50
    img = np.where(labels == 50, 200, 10).astype(np.uint8)
    assert K.auto_index(K.split_regions(K.SegmentImage(labels, 2), img)) == 2
