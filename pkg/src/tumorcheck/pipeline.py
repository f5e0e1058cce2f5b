"""End-to-end orchestration: preprocess, segment, select, classify, validate, report."""
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import features as Fe
from . import formula as F
from . import imageprep as ip
from . import kfcm as K
from . import spatial as S
from . import validation as V
from .errors import EmptyDataset, IndexOutOfRange, MissingSubdirectory, StageError

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".pgm", ".ppm", ".pnm")
INTERACTIVE = "interactive"
TEST_FRACTION = 0.2


@dataclass
class PipelineConfig:
    size: tuple = ip.TARGET_SIZE  # (width, height)
    k: int = K.DEFAULT_K
    m: float = K.DEFAULT_M
    sigma: float = K.DEFAULT_SIGMA
    tol: float = K.DEFAULT_TOL
    max_iter: int = K.DEFAULT_MAX_ITER
    seed: int = 42
    init: str = "kmeans++"
    n_init: int = 3
    selector: Union[str, int] = INTERACTIVE
    spec_path: Optional[str] = None
    train_path: Optional[str] = None
    out_dir: Optional[str] = None
    dump_stages: bool = False
    signed_distance: bool = False
    conn8: bool = False
    positive_dir: str = "yes"
    negative_dir: str = "no"

    def describe(self):
        keep = ("size", "k", "m", "sigma", "tol", "max_iter", "seed", "init", "n_init",
                "signed_distance", "conn8")
        out = {k: v for k, v in asdict(self).items() if k in keep}
        out["size"] = list(out["size"])
        return out


@contextmanager
def stage(name):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def default_spec_text():
    return resources.files("tumorcheck").joinpath("data/default.spec").read_text("utf-8")


def demo_training_text():
    return resources.files("tumorcheck").joinpath("data/demo_train.csv").read_text("utf-8")


def load_spec(path=None):
    text = default_spec_text() if path is None else Path(path).read_text("utf-8")
    spec = F.parse_spec(text)
    for name in ("phi1", "phi2"):
        if name not in spec.bindings:
            raise KeyError(f"spec must bind '{name}'")
    return spec


def load_training_set(path=None):
    text = demo_training_text() if path is None else Path(path).read_text("utf-8")
    return Fe.load_training(text)


@dataclass
class Segmentation:
    prep: np.ndarray
    partition: K.FuzzyPartition
    segment: K.SegmentImage
    regions: K.RegionSet


def preprocess_stage(cfg, img):
    with stage("preprocess"):
        return ip.preprocess(img, cfg.size)


def segment_stage(cfg, prep):
    with stage("segment"):
        part = K.kfcm(prep, cfg.k, cfg.m, cfg.sigma, cfg.tol, cfg.max_iter, cfg.seed,
                      n_init=cfg.n_init, init=cfg.init)
        seg = K.label_segments(part)
        return Segmentation(prep, part, seg, K.split_regions(seg, prep))


def _prompt_index(regions, out_dir, stdin, stdout):
    out = Path(out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    for i, masked in enumerate(regions.masked_images, 1):
        ip.write_pgm(out / f"region_{i}.pgm", masked)
    stdout.write("Enter the Index num :: ")
    stdout.flush()
    line = stdin.readline()
    try:
        return int(line.strip())
    except ValueError:
        raise IndexOutOfRange(f"not a region index: {line.strip()!r}") from None


def select_stage(cfg, regions, stdin=None, stdout=None):
    with stage("select"):
        selector = cfg.selector
        if selector == INTERACTIVE:
            selector = _prompt_index(regions, cfg.out_dir, stdin or sys.stdin, stdout or sys.stdout)
        elif selector == K.AUTO:
            selector = K.auto_index(regions)
        return selector, K.select_region(regions, selector)


@dataclass
class RunResult:
    image_id: str
    label: int
    message: str
    region_index: int
    features: np.ndarray
    verdict: V.Verdict
    segmentation: Segmentation
    checks: dict = field(default_factory=dict)

    def fragment(self, truth=None, **extra):
        return V.image_entry(self.image_id, self.label, truth, self.verdict,
                             message=self.message, region=self.region_index, **extra)


def _dump(cfg, res, spec_checks):
    d = Path(cfg.out_dir or ".") / "stages"
    d.mkdir(parents=True, exist_ok=True)
    seg = res.segmentation
    ip.write_pgm(d / "01_preprocessed.pgm", seg.prep)
    ip.write_pgm(d / "02_segment.pgm", seg.segment.labels)
    for i, (mask, masked) in enumerate(zip(seg.regions.regions, seg.regions.masked_images), 1):
        ip.write_pgm(d / f"03_region_{i}.pgm", mask)
        ip.write_pgm(d / f"03_masked_{i}.pgm", masked)
    ip.write_pgm(d / "04_selected.pgm", seg.regions.regions[res.region_index - 1])
    ts = Fe.TrainingSet(res.features[None, :], [res.label])
    (d / "05_features.csv").write_text(Fe.save_training(ts), "utf-8")
    ip.write_pgm(d / "06_background.pgm", res.verdict.background_mask)
    ip.write_pgm(d / "06_brain.pgm", res.verdict.brain_mask)
    ip.write_pgm(d / "06_final_tumor.pgm", res.verdict.final_tumor_mask)
    for name, mask in spec_checks.items():
        ip.write_pgm(d / f"check_{name}.pgm", mask)


def validate_stage(cfg, prep, labels, spec, candidate):
    with stage("validate"):
        model = S.build_model(prep, labels, conn8=cfg.conn8)
        verdict = V.validate_tumor(model, spec["phi1"], spec["phi2"], candidate)
        checks = {name: S.evaluate(model, spec[name]) for name in spec.checks}
        return verdict, checks


def run(cfg, image_path, train=None, spec=None, stdin=None, stdout=None, quiet=False,
        image_id=None):
    """Run every stage on one image.

    ``train`` and ``spec`` may be passed preloaded; otherwise they are read
    from the config (bundled defaults when unset). The K-FCM objective
    trace is printed to ``stdout`` unless ``quiet``.
    """
    stdout = stdout or sys.stdout
    with stage("spec"):
        spec = spec or load_spec(cfg.spec_path)
    with stage("load"):
        img = ip.read_image(image_path)
    prep = preprocess_stage(cfg, img)
    seg = segment_stage(cfg, prep)
    if not quiet:
        K.print_trace(seg.partition, stdout)
    index, region = select_stage(cfg, seg.regions, stdin, stdout)
    with stage("features"):
        vec = Fe.extract_features(prep, region)
    with stage("classify"):
        train = train or load_training_set(cfg.train_path)
        label, message = Fe.classify(vec, train, signed=cfg.signed_distance)
    verdict, checks = validate_stage(cfg, prep, seg.segment.labels, spec, region)
    res = RunResult(image_id or Path(image_path).name, label, message, index, vec, verdict,
                    seg, checks)
    if cfg.dump_stages:
        with stage("dump"):
            _dump(cfg, res, checks)
    return res


def scan_dataset(root, positive="yes", negative="no"):
    """List ``(path, label)`` for ``root/yes`` (label 2) then ``root/no`` (label 1)."""
    root = Path(root)
    index = []
    for sub, label in ((positive, Fe.ABNORMAL), (negative, Fe.NORMAL)):
        d = root / sub
        if not d.is_dir():
            raise MissingSubdirectory(f"{d} is not a directory")
        files = sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
        index.extend((p, label) for p in files)
    if not index:
        raise EmptyDataset(f"no images under {root}")
    return index


def stratified_split(index, split_seed, test_fraction=TEST_FRACTION):
    """Deterministic per-label shuffle; returns ``(train, test)`` index lists."""
    rng = np.random.default_rng(split_seed)
    train, test = [], []
    for label in (Fe.ABNORMAL, Fe.NORMAL):
        group = sorted((e for e in index if e[1] == label), key=lambda e: str(e[0]))
        if not group:
            continue
        order = rng.permutation(len(group))
        n_test = int(round(test_fraction * len(group)))
        if len(group) >= 2:
            n_test = min(max(n_test, 1), len(group) - 1)
        test.extend(group[i] for i in order[:n_test])
        train.extend(group[i] for i in order[n_test:])
    key = lambda e: str(e[0])
    return sorted(train, key=key), sorted(test, key=key)


def _rel(path, root):
    try:
        return Path(path).relative_to(root).as_posix()
    except ValueError:
        return Path(path).as_posix()


def _train_row(args):
    cfg, path = args
    with stage("load"):
        img = ip.read_image(path)
    prep = preprocess_stage(cfg, img)
    seg = segment_stage(cfg, prep)
    _, region = select_stage(cfg, seg.regions)
    with stage("features"):
        return Fe.extract_features(prep, region)


def _truth_mask(root, path):
    p = Path(root) / "masks" / Path(path).name
    if p.is_file():
        return ip.read_image(p) > 0
    return None


def _test_entry(args):
    cfg, root, path, truth, train, spec = args
    image_id = _rel(path, root)
    try:
        res = run(cfg, path, train=train, spec=spec, quiet=True, image_id=image_id)
    except StageError as exc:
        return V.image_entry(image_id, None, truth, error=str(exc), stage=exc.stage)
    extra = {}
    mask = _truth_mask(root, path)
    if mask is not None and mask.shape == res.verdict.final_tumor_mask.shape and mask.any():
        extra["dice"] = round(V.dice(res.verdict.final_tumor_mask, mask), 6)
    return res.fragment(truth, **extra)


def _map(fn, items, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


class _safe:
    """Picklable wrapper returning a StageError instead of raising it."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, arg):
        try:
            return self.fn(arg)
        except StageError as exc:
            return exc


def build_training(cfg, entries, jobs=1):
    """Features of the auto-selected region for each ``(path, label)``; failures skipped."""
    cfg = replace(cfg, selector=K.AUTO, dump_stages=False)
    rows, labels, errors = [], [], []
    results = _map(_safe(_train_row), [(cfg, p) for p, _ in entries], jobs)
    for (path, label), res in zip(entries, results):
        if isinstance(res, StageError):
            errors.append({"id": Path(path).as_posix(), "stage": res.stage, "error": str(res)})
            continue
        rows.append(res)
        labels.append(label)
    return Fe.TrainingSet(np.array(rows), labels), errors


def evaluate_dataset(cfg, root, split_seed=0, jobs=1, index=None):
    """Train on 80% of the dataset (stratified), test on the rest, return the report dict."""
    index = index or scan_dataset(root, cfg.positive_dir, cfg.negative_dir)
    train_idx, test_idx = stratified_split(index, split_seed)
    train, train_errors = build_training(cfg, train_idx, jobs)
    for e in train_errors:
        e["id"] = _rel(e["id"], root)

    cfg = replace(cfg, selector=K.AUTO, dump_stages=False)
    spec = load_spec(cfg.spec_path)
    entries = _map(_test_entry, [(cfg, root, p, lab, train, spec) for p, lab in test_idx], jobs)
    entries.sort(key=lambda e: e["id"])

    scored = [e for e in entries if e["predicted"] is not None]
    if scored:
        cm = V.confusion([e["predicted"] for e in scored], [e["truth"] for e in scored])
    else:
        cm = V.ConfusionMatrix()
    dices = [e["dice"] for e in entries if "dice" in e]
    return V.report(
        entries, cm,
        config=cfg.describe(),
        split={"seed": split_seed, "test_fraction": TEST_FRACTION,
               "n_train": len(train), "n_test": len(test_idx)},
        segmentation={"mean_dice": round(float(np.mean(dices)), 6) if dices else None,
                      "n_scored": len(dices)},
        train_errors=train_errors,
    )


def train_from_dataset(cfg, root, jobs=1):
    index = scan_dataset(root, cfg.positive_dir, cfg.negative_dir)
    ts, errors = build_training(cfg, index, jobs)
    for e in errors:
        log.warning("skipped %s: %s", e["id"], e["error"])
    return ts


def check_image(cfg, image_path, candidate_path, spec=None, preprocess=False):
    """Validation only: model from the image as given (or preprocessed), candidate from a mask file."""
    with stage("spec"):
        spec = spec or load_spec(cfg.spec_path)
    with stage("load"):
        img = ip.read_image(image_path)
        if not ip.is_gray(img):
            img = ip.to_grayscale(img)
        candidate = ip.read_image(candidate_path)
        if not ip.is_gray(candidate):
            candidate = ip.to_grayscale(candidate)
        candidate = candidate > 0
    if preprocess:
        img = preprocess_stage(cfg, img)
        if candidate.shape != img.shape:
            w, h = img.shape[1], img.shape[0]
            candidate = ip.resize(candidate.astype(np.uint8) * 255, w, h) >= 128
    verdict, checks = validate_stage(cfg, img, None, spec, candidate)
    return verdict, checks


def run_report(res):
    """Single-image report document."""
    cm = V.ConfusionMatrix()
    return V.report([res.fragment()], cm)

