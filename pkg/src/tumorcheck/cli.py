"""``tumorcheck`` command line.

Exit codes: 0 success / validation satisfied, 3 validation violated, 1 error.
``TUMORCHECK_SEED`` overrides ``--seed``.
"""
import logging
import os
import sys
from pathlib import Path

import click

from . import features as Fe
from . import imageprep as ip
from . import kfcm as K
from . import pipeline as P
from . import validation as V
from .errors import TumorcheckError

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 3


def _seed(seed):
    env = os.environ.get("TUMORCHECK_SEED")
    return int(env) if env not in (None, "") else seed


def _selector(value):
    value = value.strip().lower()
    if value in (K.AUTO, P.INTERACTIVE):
        return value
    try:
        return int(value)
    except ValueError:
        raise click.BadParameter("expected 'auto', 'interactive' or a region index") from None


def _size(value):
    try:
        w, h = (int(v) for v in value.lower().split("x"))
    except ValueError:
        raise click.BadParameter("expected WIDTHxHEIGHT, e.g. 256x256") from None
    if w < 1 or h < 1:
        raise click.BadParameter("size must be positive")
    return (w, h)


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_ERROR)


def segmentation_options(fn):
    opts = [
        click.option("--k", "k", type=int, default=K.DEFAULT_K, show_default=True,
                     help="Number of K-FCM clusters."),
        click.option("--seed", type=int, default=42, show_default=True),
        click.option("--size", default="256x256", show_default=True,
                     help="Preprocessing target size WIDTHxHEIGHT."),
        click.option("--init", type=click.Choice(K.INITS), default="kmeans++", show_default=True),
        click.option("--n-init", type=int, default=3, show_default=True),
        click.option("--spec", "spec_path", type=click.Path(dir_okay=False),
                     help="Formula spec file binding phi1 and phi2."),
        click.option("--signed-distance", is_flag=True,
                     help="Classify with |mean(row - test)| instead of mean |row - test|."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(k, seed, size, init, n_init, spec_path, signed_distance, **kw):
    return P.PipelineConfig(k=k, seed=_seed(seed), size=_size(size), init=init, n_init=n_init,
                            spec_path=spec_path, signed_distance=signed_distance, **kw)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Segment, classify and formally validate tumor candidates in brain slices."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--select", "select", default=P.INTERACTIVE, show_default=True,
              help="auto, interactive, or a 1-based region index.")
@click.option("--train", "train_path", type=click.Path(dir_okay=False),
              help="Training CSV (defaults to the bundled demo set).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="tumorcheck-out",
              show_default=True)
@click.option("--dump-stages", is_flag=True, help="Write every intermediate artifact.")
@segmentation_options
def run(input_path, select, train_path, out_dir, dump_stages, **opts):
    """Run the full pipeline on one image."""
    cfg = _config(selector=_selector(select), train_path=train_path, out_dir=out_dir,
                  dump_stages=dump_stages, **opts)
    try:
        res = P.run(cfg, input_path)
    except TumorcheckError as exc:
        _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ip.write_pgm(out / "final_tumor.pgm", res.verdict.final_tumor_mask)
    (out / "report.json").write_text(V.emit_report(P.run_report(res)), "utf-8")
    click.echo(f"region {res.region_index}: {res.message}")
    if res.verdict.satisfied:
        click.echo("validation: satisfied")
        sys.exit(EXIT_OK)
    click.echo("validation: violated " + ", ".join(
        f"{v} ({V.VIOLATIONS[v]})" for v in res.verdict.violations))
    sys.exit(EXIT_VIOLATED)


@cli.command("eval")
@click.option("--dataset", required=True, type=click.Path(file_okay=False, exists=True))
@click.option("--split-seed", type=int, default=0, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="tumorcheck-out",
              show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--positive-dir", default="yes", show_default=True)
@click.option("--negative-dir", default="no", show_default=True)
@segmentation_options
def eval_cmd(dataset, split_seed, out_dir, jobs, positive_dir, negative_dir, **opts):
    """Train on a stratified 80% split of a yes/no dataset and report on the rest."""
    cfg = _config(positive_dir=positive_dir, negative_dir=negative_dir, **opts)
    try:
        doc = P.evaluate_dataset(cfg, dataset, split_seed=split_seed, jobs=jobs)
    except TumorcheckError as exc:
        _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(V.emit_report(doc), "utf-8")
    m = doc["metrics"]
    click.echo(f"accuracy={m['accuracy']} precision={m['precision']} recall={m['recall']} "
               f"f1={m['f1']} mean_dice={doc['segmentation']['mean_dice']}")
    click.echo(f"report written to {out / 'report.json'}")


@cli.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False))
@click.option("--candidate", required=True, type=click.Path(dir_okay=False))
@click.option("--preprocess", is_flag=True, help="Apply the preprocessing chain first.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              help="Write background/brain/final masks here.")
def check(input_path, spec_path, candidate, preprocess, out_dir):
    """Validate a candidate tumor mask against an image (validation only)."""
    cfg = P.PipelineConfig(spec_path=spec_path)
    try:
        verdict, checks = P.check_image(cfg, input_path, candidate, preprocess=preprocess)
    except TumorcheckError as exc:
        _fail(exc)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        ip.write_pgm(out / "background.pgm", verdict.background_mask)
        ip.write_pgm(out / "brain.pgm", verdict.brain_mask)
        ip.write_pgm(out / "final_tumor.pgm", verdict.final_tumor_mask)
        for name, mask in checks.items():
            ip.write_pgm(out / f"check_{name}.pgm", mask)
    if verdict.satisfied:
        click.echo("satisfied")
        sys.exit(EXIT_OK)
    click.echo("violated: " + ", ".join(verdict.violations))
    sys.exit(EXIT_VIOLATED)


@cli.command("gen-corpus")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--n-tumor", type=int, default=20, show_default=True)
@click.option("--n-clean", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--size", type=int, default=256, show_default=True)
def gen_corpus(out_dir, n_tumor, n_clean, seed, size):
    """Write a synthetic yes/no phantom corpus with ground-truth masks."""
    from .synth import generate_corpus

    paths = generate_corpus(out_dir, n_tumor, n_clean, _seed(seed), size)
    click.echo(f"wrote {len(paths)} images to {out_dir}")


@cli.command()
@click.option("--dataset", required=True, type=click.Path(file_okay=False, exists=True))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--jobs", type=int, default=1, show_default=True)
@segmentation_options
def train(dataset, out_path, jobs, **opts):
    """Build a training CSV from every image of a yes/no dataset."""
    cfg = _config(**opts)
    try:
        ts = P.train_from_dataset(cfg, dataset, jobs)
    except TumorcheckError as exc:
        _fail(exc)
    Path(out_path).write_text(Fe.save_training(ts), "utf-8")
    click.echo(f"wrote {len(ts)} rows to {out_path}")


def main(argv=None):
    try:
        cli.main(args=argv, prog_name="tumorcheck", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(EXIT_ERROR)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
