"""Acceptance criteria 1-9, each with its tolerance and time limit.

Every criterion prints one ``CRITERION n PASS|FAIL`` line. Run directly
(``python tests/test_acceptance.py``) or under pytest.
"""
import itertools
import random
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import planted_fixture  # noqa: E402
from oracles import (all_pairs_distance, components, connect_oracle, dilate_within,  # noqa: E402
                     ef_oracle, eg_oracle, ex_oracle)
from test_formula import random_formula  # noqa: E402
from test_validation import reference_matches  # noqa: E402
from tumorcheck import formula as F  # noqa: E402
from tumorcheck import imageprep as ip  # noqa: E402
from tumorcheck import kfcm as K  # noqa: E402
from tumorcheck import spatial as S  # noqa: E402
from tumorcheck import validation as V  # noqa: E402
from tumorcheck.errors import ParseError  # noqa: E402
from tumorcheck.pipeline import PipelineConfig, evaluate_dataset  # noqa: E402
from tumorcheck.synth import generate_corpus  # noqa: E402


def c1_reference_metrics():
    c = V.ConfusionMatrix(tp=50, fp=2, tn=48, fn=0)
    pct = {k: round(100 * fn(c), 2) for k, fn in V.METRICS.items()}
    ok = (pct["precision"], pct["recall"], pct["accuracy"], pct["f1"]) == \
        (96.15, 100.0, 98.0, 98.04)
    found = reference_matches(200)
    ok = ok and (50, 2, 48, 0) in found
    smallest = min(found, key=lambda m: (sum(m), m))
    return ok, (f"precision {pct['precision']} recall {pct['recall']} accuracy "
                f"{pct['accuracy']} f1 {pct['f1']}; {len(found)} matrices match, "
                f"smallest {smallest}"), 1.0


def c2_ctl():
    bad = 0
    for conn8 in (False, True):
        m = S.build_model(np.zeros((3, 3), np.uint8), conn8=conn8)
        for bits in itertools.product((False, True), repeat=9):
            phi = np.array(bits).reshape(3, 3)
            bad += not (S.ex(m, phi) == ex_oracle(phi, conn8)).all()
            bad += not (S.ef(m, phi) == ef_oracle(phi, conn8)).all()
            bad += not (S.eg(m, phi) == eg_oracle(phi, conn8)).all()
    return bad == 0, f"512 labelings x 3 operators x 2 adjacencies, {bad} mismatches", 5.0


def c3_spatial():
    rng = np.random.default_rng(2024)
    m = S.build_model(np.zeros((16, 16), np.uint8))
    bad = 0
    for _ in range(200):
        p1 = rng.random((16, 16)) < rng.uniform(0.3, 0.8)
        p2 = rng.random((16, 16)) < rng.uniform(0.01, 0.3)
        bad += not (S.connect(m, p1, p2) == connect_oracle(p1, p2)).all()
        inc = np.zeros_like(p1)
        for comp in components(p1):
            if (comp & p2).any():
                inc |= comp
        bad += not (S.increase(m, p1, p2) == inc).all()
        dt = all_pairs_distance(p2)
        bad += not (S.distance_transform(m, p2) == dt).all()
        d = float(rng.uniform(0.5, 10))
        bad += not (S.str_(m, d, p2) == (dt < d)).all()
        bad += not (S.ef(m, p2) == dilate_within(np.ones_like(p2), p2)).all()
    return bad == 0, f"200 random 16x16 masks, {bad} mismatches", 10.0


def c4_kfcm():
    failures = []

    def cb(it, u, centers, obj):
        if np.abs(u.sum(axis=0) - 1).max() > 1e-9:
            failures.append(f"membership sum at iteration {it}")

    def monotone(trace):
        return all(b <= a + 1e-6 * abs(a) for a, b in zip(trace, trace[1:]))

    img = np.full((16, 16), 40, np.uint8)
    img[:, 8:] = 200
    part = K.kfcm(img, k=2, seed=0, callback=cb)
    centers_ok = np.allclose(np.sort(part.centers), [40, 200], atol=1)
    from sklearn.metrics import adjusted_rand_score
    ari = adjusted_rand_score((img == 200).ravel(), np.argmax(part.memberships, axis=0))
    runs = [part]
    rng = np.random.default_rng(4)
    for i in range(6):
        x = rng.integers(0, 256, (24, 24), dtype=np.uint8)
        runs.append(K.kfcm(x, k=4, seed=i, callback=cb, init=K.INITS[i % 2]))
    mono = all(monotone(r.objective_trace) for r in runs)
    ok = centers_ok and ari == 1.0 and mono and not failures
    return ok, (f"centers {np.round(np.sort(part.centers), 3).tolist()}, ARI {ari}, "
                f"monotone {mono}, sum violations {len(failures)}"), 5.0


def c5_preprocess():
    big = ip.preprocess(np.random.default_rng(0).integers(0, 256, (1427, 1275), dtype=np.uint8))
    imp = np.zeros((3, 3), np.uint8)
    imp[1, 1] = 255
    center = int(ip.smooth(imp)[1, 1])
    return big.shape == (256, 256) and center == 158, \
        f"1427x1275 -> {big.shape[1]}x{big.shape[0]}, impulse center {center}", 1.0


def c6_parser():
    rnd = random.Random(6)
    trips = sum(F.parse(F.to_source(f)) == f
                for f in (random_formula(rnd, 5) for _ in range(1000)))
    crashes = 0
    for _ in range(10_000):
        data = bytes(rnd.randrange(256) if rnd.random() < 0.2 else rnd.choice(b"()!&|,<>=0.9 b")
                     for _ in range(rnd.randrange(30)))
        try:
            F.parse(data)
        except ParseError:
            pass
        except Exception:  # noqa: BLE001
            crashes += 1
    B, I = F.Border(), F.IntensityCmp("<", 3)
    laws = [F.parse("border | border & intensity < 3") == F.Or(B, F.And(B, I)),
            F.parse("!border & border") == F.And(F.Not(B), B),
            F.parse("EX border | border") == F.Or(F.EX(B), B),
            F.parse("border & border & border") == F.And(F.And(B, B), B)]
    ok = trips == 1000 and crashes == 0 and all(laws)
    return ok, f"{trips}/1000 round trips, {crashes} fuzz crashes, {sum(laws)}/4 laws", 10.0


def c7_validation():
    img, _, blob = planted_fixture()
    m = S.build_model(img)
    phi1, phi2 = F.parse("intensity < 20"), F.parse("intensity >= 20")
    good = V.validate_tumor(m, phi1, phi2, blob)
    over = blob.copy()
    over[30, 30:] = True
    bad = V.validate_tumor(m, phi1, phi2, over)
    empty = V.validate_tumor(m, phi1, phi2, np.zeros_like(blob))
    ok = good.violations == [] and "V2" in bad.violations and empty.violations == ["V1"]
    return ok, f"planted {good.violations}, overlap {bad.violations}, empty {empty.violations}", 1.0


_eval_cache = {}


def _eval_twice():
    if not _eval_cache:
        with tempfile.TemporaryDirectory() as d:
            t0 = time.perf_counter()
            generate_corpus(d, 20, 20, seed=0, size=256)
            first = evaluate_dataset(PipelineConfig(), d, split_seed=0, jobs=1)
            _eval_cache["seconds"] = time.perf_counter() - t0
            second = evaluate_dataset(PipelineConfig(), d, split_seed=0, jobs=1)
        _eval_cache["docs"] = (first, second)
    return _eval_cache


def c8_end_to_end():
    res = _eval_twice()
    doc = res["docs"][0]
    acc, dice = doc["metrics"]["accuracy"], doc["segmentation"]["mean_dice"]
    ok = acc is not None and acc >= 0.90 and dice is not None and dice >= 0.80 \
        and res["seconds"] < 60
    return ok, (f"accuracy {acc}, mean Dice {dice} over {doc['segmentation']['n_scored']} "
                f"tumor images, {res['seconds']:.1f} s single-threaded"), None


def c9_determinism():
    first, second = _eval_twice()["docs"]
    a, b = V.emit_report(first), V.emit_report(second)
    return a == b, f"reports identical: {a == b} ({len(a)} bytes)", None


CRITERIA = [(1, c1_reference_metrics), (2, c2_ctl), (3, c3_spatial), (4, c4_kfcm), (5, c5_preprocess),
            (6, c6_parser), (7, c7_validation), (8, c8_end_to_end), (9, c9_determinism)]


def evaluate(n, fn):
    t0 = time.perf_counter()
    ok, detail, limit = fn()
    dt = time.perf_counter() - t0
    if limit is not None and dt >= limit:
        ok = False
        detail += f"; exceeded {limit} s"
    line = f"CRITERION {n} {'PASS' if ok else 'FAIL'} ({dt:.2f} s): {detail}"
    return ok, line


@pytest.mark.parametrize("n,fn", CRITERIA, ids=[f"criterion{n}" for n, _ in CRITERIA])
def test_criterion(n, fn, capsys):
    ok, line = evaluate(n, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n, fn) for n, fn in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
