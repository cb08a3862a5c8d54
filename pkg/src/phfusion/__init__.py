"""Image classification by weighted late fusion of three spatial-pyramid
features: visual words over dense SIFT (PHOW), HSV colour (PHOC) and
edge orientation (PHOG), each classified by a one-vs-rest SMO SVM.
"""
from ._backend import BACKEND
from .codebook import Codebook, build_codebook
from .config import PipelineConfig
from .errors import DataError, InvariantViolation, PhfusionError
from .features import FeatureKind, FeatureVector, build_phoc, build_phog, build_phow
from .fusion import FusionWeights, decide, fuse, learn_weights
from .image_core import load_image
from .modelio import load_model, save_model
from .pipeline import ModelBundle, classify, evaluate, ingest_dataset, train_pipeline
from .svm import MulticlassSvm, ovr_train, predict_proba

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Codebook",
    "DataError",
    "FeatureKind",
    "FeatureVector",
    "FusionWeights",
    "InvariantViolation",
    "ModelBundle",
    "MulticlassSvm",
    "PhfusionError",
    "PipelineConfig",
    "build_codebook",
    "build_phoc",
    "build_phog",
    "build_phow",
    "classify",
    "decide",
    "evaluate",
    "fuse",
    "ingest_dataset",
    "learn_weights",
    "load_image",
    "load_model",
    "ovr_train",
    "predict_proba",
    "save_model",
    "train_pipeline",
]
