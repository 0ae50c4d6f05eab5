"""Utility functions for quality-verify."""

from .embedding_math import cosine, decompose
from .qscore import REFERENCE_PARAMS, qa_score, qa_score_batch, qa_scores, weight
from .metrics import ScoreSet, eer, fmr_at, fnmr_at, roc_auc, threshold_at_fmr
from .fusion import aggregate
from .embedding_io import load_embeddings, write_embeddings
from .protocol import all_pairs, build_comparison_set

__all__ = [
    "cosine",
    "decompose",
    "REFERENCE_PARAMS",
    "qa_score",
    "qa_score_batch",
    "qa_scores",
    "weight",
    "ScoreSet",
    "eer",
    "fmr_at",
    "fnmr_at",
    "roc_auc",
    "threshold_at_fmr",
    "aggregate",
    "load_embeddings",
    "write_embeddings",
    "all_pairs",
    "build_comparison_set",
]
