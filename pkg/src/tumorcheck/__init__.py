"""Spatial model checking toolkit for tumor detection in 2D brain images."""
from .errors import TumorcheckError
from .formula import parse, parse_spec, to_source
from .imageprep import preprocess, read_image, write_pgm
from .kfcm import label_segments, select_region, split_regions
from .features import classify, extract_features, load_training, save_training
from .spatial import build_model, evaluate
from .validation import confusion, metrics_block, validate_tumor
from .pipeline import PipelineConfig, evaluate_dataset, run

__version__ = "0.1.0"
