"""Pair protocols, template manifests and comparison-set construction."""

import logging
import math
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..exceptions import (
    DimensionMismatchError,
    DuplicateIdError,
    MissingSubjectIdError,
    ParseError,
    UnknownIdError,
)
from ..models.embedding import Embedding, Template
from ..models.scoring import ComparisonSet, Label
from .embedding_io import load_embeddings
from .embedding_math import cosine_from_parts, decompose, squared_norm
from .tables import atomic_write_text

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PROTOCOL_COLUMNS = ["a", "b", "label"]
MANIFEST_COLUMNS = ["template_id", "sample_id"]


def _read_csv(path: PathLike, columns: List[str]) -> pd.DataFrame:
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"cannot parse {path}: {e}") from e
    df.columns = [c.strip() for c in df.columns]
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ParseError(f"{path} is missing columns: {', '.join(missing)}", row=1)
    df = df[columns].apply(lambda col: col.str.strip())
    return df.reset_index(drop=True)


def validate_protocol(df: pd.DataFrame) -> pd.DataFrame:
    """Normalize labels and reject unknown labels and repeated unordered pairs.

    Rows are numbered as in the CSV file (header is row 1).
    """
    df = df.copy()
    df["label"] = df["label"].str.lower()
    bad = ~df["label"].isin([Label.GENUINE.value, Label.IMPOSTER.value])
    if bad.any():
        i = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(f"unknown label {df['label'].iloc[i]!r}", row=i + 2)
    keys = [tuple(sorted(pair)) for pair in zip(df["a"], df["b"])]
    dup = pd.Series(keys).duplicated()
    if dup.any():
        i = int(np.flatnonzero(dup.to_numpy())[0])
        raise DuplicateIdError(f"pair ({df['a'].iloc[i]}, {df['b'].iloc[i]}) listed twice", row=i + 2)
    return df


def load_protocol(path: PathLike) -> pd.DataFrame:
    """Load a headered `a,b,label` pair protocol CSV."""
    df = validate_protocol(_read_csv(path, PROTOCOL_COLUMNS))
    logger.info(f"Loaded {len(df)} protocol pairs from {path}")
    return df


def write_protocol(df: pd.DataFrame, path: PathLike) -> None:
    atomic_write_text(path, df[PROTOCOL_COLUMNS].to_csv(index=False))


def all_pairs(embeddings: Sequence[Embedding]) -> pd.DataFrame:
    """Every unordered sample pair once, labeled genuine iff subjects match.

    Pairs are ordered lexicographically by (a, b) with a < b.

    Raises:
        MissingSubjectIdError: If any embedding has no subject_id
    """
    for i, e in enumerate(embeddings):
        if e.subject_id is None:
            raise MissingSubjectIdError(f"embedding '{e.sample_id}' has no subject_id", index=i)
    ordered = sorted(embeddings, key=lambda e: e.sample_id)
    ids = np.array([e.sample_id for e in ordered], dtype=object)
    subjects = np.array([e.subject_id for e in ordered], dtype=object)
    a, b = np.triu_indices(len(ordered), k=1)
    genuine = subjects[a] == subjects[b]
    return pd.DataFrame({
        "a": ids[a],
        "b": ids[b],
        "label": np.where(genuine, Label.GENUINE.value, Label.IMPOSTER.value),
    })


def _index(embeddings: Sequence[Embedding]) -> Dict[str, Embedding]:
    index: Dict[str, Embedding] = {}
    for i, e in enumerate(embeddings):
        if e.sample_id in index:
            raise DuplicateIdError(f"duplicate sample_id '{e.sample_id}'", index=i)
        index[e.sample_id] = e
    return index


def build_comparison_set(embeddings: Sequence[Embedding], protocol: pd.DataFrame) -> ComparisonSet:
    """Score every protocol pair by cosine and attach its minimum quality.

    Raises:
        UnknownIdError: If the protocol references a sample not in `embeddings`
    """
    index = _index(embeddings)
    sq_norms: Dict[str, float] = {}
    raw = np.empty(len(protocol))
    q_min = np.empty(len(protocol))
    pair_ids = []
    d: Optional[int] = None

    for k, (a, b) in enumerate(zip(protocol["a"], protocol["b"])):
        for ident in (a, b):
            if ident not in index:
                raise UnknownIdError(f"protocol references unknown sample '{ident}'", index=k)
            if ident not in sq_norms:
                sq_norms[ident] = squared_norm(index[ident].vector)
        ea, eb = index[a], index[b]
        if d is None:
            d = ea.d
        if ea.d != d or eb.d != d:
            raise DimensionMismatchError(f"pair ({a}, {b}) mixes dimensions", index=k)
        raw[k] = cosine_from_parts(ea.vector, eb.vector, sq_norms[a], sq_norms[b])
        q_min[k] = min(math.sqrt(sq_norms[a]), math.sqrt(sq_norms[b]))
        pair_ids.append((a, b))

    cset = ComparisonSet(
        raw=raw,
        q_min=q_min,
        is_genuine=(protocol["label"] == Label.GENUINE.value).to_numpy(),
        pair_ids=tuple(pair_ids),
    )
    logger.info(f"Built comparison set: {cset.n_genuine} genuine, {cset.n_imposter} imposter")
    return cset


def load_comparison_set(embeddings_path: PathLike, protocol_path: Optional[PathLike] = None) -> ComparisonSet:
    """Load embeddings and score them on a protocol (all pairs when None)."""
    embeddings = load_embeddings(embeddings_path)
    protocol = load_protocol(protocol_path) if protocol_path else all_pairs(embeddings)
    return build_comparison_set(embeddings, protocol)


def load_template_manifest(path: PathLike) -> pd.DataFrame:
    """Load a headered `template_id,sample_id` CSV."""
    return _read_csv(path, MANIFEST_COLUMNS)


def build_templates(embeddings: Sequence[Embedding], manifest: pd.DataFrame) -> List[Template]:
    """Group decomposed embeddings into templates, in first-appearance order."""
    index = _index(embeddings)
    grouped: "OrderedDict[str, list]" = OrderedDict()
    for k, (template_id, sample_id) in enumerate(zip(manifest["template_id"], manifest["sample_id"])):
        if sample_id not in index:
            raise UnknownIdError(f"template '{template_id}' references unknown sample '{sample_id}'", row=k + 2)
        grouped.setdefault(template_id, []).append(decompose(index[sample_id]))
    return [Template(frames=tuple(frames), template_id=tid) for tid, frames in grouped.items()]
