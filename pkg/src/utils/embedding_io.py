"""Embedding file reader and writer.

Two interchangeable encodings:

Text (UTF-8, space separated)::

    d n
    sample_id subject_id v1 ... vd      # subject_id '-' when absent

Binary (little endian)::

    b"QMEF" | u8 version | u32 d | u32 n
    n x ( u16 len | sample_id | u16 len | subject_id | d x f32 )

A zero-length subject_id means absent. Values are stored as float32 in the
binary encoding and with 17 significant digits in the text encoding.
"""

import logging
import struct
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from ..exceptions import (
    DimensionMismatchError,
    DuplicateIdError,
    EmbeddingError,
    ParseError,
)
from ..models.embedding import Embedding
from .tables import atomic_write_bytes, atomic_write_text

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MAGIC = b"QMEF"
VERSION = 1
NO_SUBJECT = "-"
BINARY_SUFFIX = ".qmef"
_HEADER = struct.Struct("<4sBII")
_ID_LEN = struct.Struct("<H")


def is_binary_path(path: PathLike) -> bool:
    return Path(path).suffix.lower() == BINARY_SUFFIX


def _with_row(error: EmbeddingError, row: int) -> EmbeddingError:
    return type(error)(str(error), row=row)


def _make_embedding(
    vector: np.ndarray,
    sample_id: str,
    subject_id: Optional[str],
    row: int,
    seen: set,
) -> Embedding:
    if sample_id in seen:
        raise DuplicateIdError(f"duplicate sample_id '{sample_id}'", row=row)
    seen.add(sample_id)
    try:
        return Embedding(vector=vector, sample_id=sample_id, subject_id=subject_id)
    except EmbeddingError as e:
        raise _with_row(e, row) from e


def parse_text(text: str) -> List[Embedding]:
    """Parse the text encoding."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty embedding file", row=1)
    header = lines[0].split()
    try:
        d, n = (int(x) for x in header)
    except ValueError as e:
        raise ParseError(f"header must be 'd n', got {lines[0]!r}", row=1) from e
    if d < 1 or n < 0:
        raise ParseError(f"invalid header d={d} n={n}", row=1)
    if len(lines) - 1 != n:
        raise ParseError(f"header announces {n} records, file has {len(lines) - 1}", row=1)

    embeddings = []
    seen: set = set()
    for row, line in enumerate(lines[1:], start=2):
        fields = line.split()
        if len(fields) < 3:
            raise ParseError(f"expected sample_id, subject_id and {d} values", row=row)
        if len(fields) - 2 != d:
            raise DimensionMismatchError(f"record has {len(fields) - 2} values, expected {d}", row=row)
        try:
            vector = np.array(fields[2:], dtype=np.float64)
        except ValueError as e:
            raise ParseError(f"non-numeric component: {e}", row=row) from e
        subject = None if fields[1] == NO_SUBJECT else fields[1]
        embeddings.append(_make_embedding(vector, fields[0], subject, row, seen))
    return embeddings


def format_text(embeddings: Sequence[Embedding]) -> str:
    """Render the text encoding."""
    d = _common_dimension(embeddings)
    lines = [f"{d} {len(embeddings)}"]
    for e in embeddings:
        for ident in (e.sample_id, e.subject_id or ""):
            if any(c.isspace() for c in ident) or ident == NO_SUBJECT:
                raise ParseError(f"id {ident!r} cannot be written to the text encoding")
        if not e.sample_id:
            raise ParseError("empty sample_id cannot be written to the text encoding")
        values = " ".join(f"{v:.17g}" for v in e.vector)
        lines.append(f"{e.sample_id} {e.subject_id or NO_SUBJECT} {values}")
    return "\n".join(lines) + "\n"


def _read_id(data: bytes, offset: int, row: int):
    try:
        (length,) = _ID_LEN.unpack_from(data, offset)
        offset += _ID_LEN.size
        raw = data[offset:offset + length]
        if len(raw) != length:
            raise ParseError("truncated id", row=row)
        return raw.decode("utf-8"), offset + length
    except struct.error as e:
        raise ParseError("truncated record", row=row) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"id is not valid UTF-8: {e}", row=row) from e


def parse_binary(data: bytes) -> List[Embedding]:
    """Parse the binary encoding."""
    try:
        magic, version, d, n = _HEADER.unpack_from(data, 0)
    except struct.error as e:
        raise ParseError("truncated header", row=1) from e
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}, expected {MAGIC!r}", row=1)
    if version != VERSION:
        raise ParseError(f"unsupported version {version}", row=1)
    if d < 1:
        raise ParseError(f"invalid dimension {d}", row=1)

    offset = _HEADER.size
    vector_bytes = 4 * d
    embeddings = []
    seen: set = set()
    for record in range(n):
        row = record + 1
        sample_id, offset = _read_id(data, offset, row)
        subject_id, offset = _read_id(data, offset, row)
        chunk = data[offset:offset + vector_bytes]
        if len(chunk) != vector_bytes:
            raise ParseError("truncated vector", row=row)
        offset += vector_bytes
        vector = np.frombuffer(chunk, dtype="<f4").astype(np.float64)
        embeddings.append(_make_embedding(vector, sample_id, subject_id or None, row, seen))
    if offset != len(data):
        raise ParseError(f"{len(data) - offset} trailing bytes after {n} records")
    return embeddings


def format_binary(embeddings: Sequence[Embedding]) -> bytes:
    """Render the binary encoding."""
    d = _common_dimension(embeddings)
    parts = [_HEADER.pack(MAGIC, VERSION, d, len(embeddings))]
    for e in embeddings:
        for ident in (e.sample_id, e.subject_id or ""):
            encoded = ident.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise ParseError(f"id longer than 65535 bytes: {ident[:32]!r}...")
            parts.append(_ID_LEN.pack(len(encoded)))
            parts.append(encoded)
        parts.append(e.vector.astype("<f4").tobytes())
    return b"".join(parts)


def _common_dimension(embeddings: Sequence[Embedding]) -> int:
    if not embeddings:
        raise ParseError("cannot write an empty embedding collection")
    d = embeddings[0].d
    for i, e in enumerate(embeddings):
        if e.d != d:
            raise DimensionMismatchError(f"embedding '{e.sample_id}' has d={e.d}, expected {d}", index=i)
    return d


def load_embeddings(path: PathLike) -> List[Embedding]:
    """Load an embedding file, detecting the encoding from its first bytes.

    Raises:
        ParseError, DimensionMismatchError, NonFiniteError, ZeroNormError,
        DuplicateIdError: with the offending row
    """
    data = Path(path).read_bytes()
    if data[:4] == MAGIC:
        embeddings = parse_binary(data)
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"{path} is neither binary embeddings nor UTF-8 text") from e
        embeddings = parse_text(text)
    logger.info(f"Loaded {len(embeddings)} embeddings from {path}")
    return embeddings


def write_embeddings(
    embeddings: Sequence[Embedding],
    path: PathLike,
    binary: Optional[bool] = None,
) -> None:
    """Write embeddings atomically; binary defaults to a '.qmef' suffix."""
    if binary is None:
        binary = is_binary_path(path)
    if binary:
        atomic_write_bytes(path, format_binary(embeddings))
    else:
        atomic_write_text(path, format_text(embeddings))
    logger.info(f"Wrote {len(embeddings)} embeddings to {path}")
