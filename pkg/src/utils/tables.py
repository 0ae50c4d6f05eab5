"""Tabular outputs, atomic file writes and the calibration document.

All numbers are written with 17 significant digits so every float64
survives a write/read cycle unchanged.
"""

import hashlib
import logging
import os
import tempfile
from io import StringIO
from pathlib import Path
from typing import Union

import pandas as pd

from ..exceptions import ParseError
from ..models.calibration import CalibrationPoint, CalibrationResult
from ..models.scoring import WeightParams

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"
CALIBRATION_HEADER = "# quality-weighting calibration"
POINTS_MARKER = "[points]"
POINT_COLUMNS = ["fmr_target", "threshold", "omega_opt", "fnmr"]
_SCALAR_KEYS = ("alpha", "beta", "fit_r2", "mean_t", "mean_omega")


def atomic_write_bytes(path: PathLike, data: bytes) -> None:
    """Write a file via a temp file in the same directory and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def file_digest(path: PathLike) -> str:
    """SHA-256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def format_float(value: float) -> str:
    return FLOAT_FORMAT % value


def write_tsv(df: pd.DataFrame, path: PathLike) -> None:
    """Write a TSV with one header row and 17-digit floats."""
    atomic_write_text(path, df.to_csv(sep="\t", index=False, float_format=FLOAT_FORMAT))


def read_tsv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, sep="\t", float_precision="round_trip")


def points_frame(result: CalibrationResult, dataset: str) -> pd.DataFrame:
    """Calibration points as rows of (dataset, fmr_target, threshold, omega_opt, fnmr)."""
    df = pd.DataFrame([p.model_dump() for p in result.points], columns=POINT_COLUMNS)
    df.insert(0, "dataset", dataset)
    return df


def dump_calibration(result: CalibrationResult) -> str:
    """Serialize a calibration result to its text document."""
    values = {
        "alpha": result.params.alpha,
        "beta": result.params.beta,
        "fit_r2": result.fit_r2,
        "mean_t": result.mean_t,
        "mean_omega": result.mean_omega,
    }
    lines = [CALIBRATION_HEADER]
    lines += [f"{key}\t{format_float(value)}" for key, value in values.items()]
    lines.append(f"use_sigmoid\t{'true' if result.use_sigmoid else 'false'}")
    lines.append(POINTS_MARKER)
    table = pd.DataFrame([p.model_dump() for p in result.points], columns=POINT_COLUMNS)
    return "\n".join(lines) + "\n" + table.to_csv(sep="\t", index=False, float_format=FLOAT_FORMAT)


def parse_calibration(text: str) -> CalibrationResult:
    """Parse a calibration document written by dump_calibration.

    Raises:
        ParseError: On missing keys, bad numbers or a missing points table
    """
    lines = text.splitlines()
    scalars = {}
    for row, line in enumerate(lines, start=1):
        if line == POINTS_MARKER:
            table_start = row
            break
        if not line.strip() or line.startswith("#"):
            continue
        key, sep, value = line.partition("\t")
        if not sep:
            raise ParseError(f"expected 'key<TAB>value', got {line!r}", row=row)
        scalars[key] = (value.strip(), row)
    else:
        raise ParseError(f"calibration document has no {POINTS_MARKER} section")

    missing = [k for k in _SCALAR_KEYS if k not in scalars]
    if missing:
        raise ParseError(f"calibration document is missing keys: {', '.join(missing)}")
    numbers = {}
    for key in _SCALAR_KEYS:
        value, row = scalars[key]
        try:
            numbers[key] = float(value)
        except ValueError as e:
            raise ParseError(f"{key} is not a number: {value!r}", row=row) from e
    use_sigmoid = scalars.get("use_sigmoid", ("true", 0))[0].lower() == "true"

    table = pd.read_csv(
        StringIO("\n".join(lines[table_start:])),
        sep="\t",
        float_precision="round_trip",
    )
    if list(table.columns) != POINT_COLUMNS:
        raise ParseError(
            f"points table columns {list(table.columns)} != {POINT_COLUMNS}", row=table_start + 1
        )
    points = [
        CalibrationPoint(**{c: float(getattr(r, c)) for c in POINT_COLUMNS})
        for r in table.itertuples(index=False)
    ]
    return CalibrationResult(
        params=WeightParams(alpha=numbers["alpha"], beta=numbers["beta"]),
        points=points,
        fit_r2=numbers["fit_r2"],
        mean_t=numbers["mean_t"],
        mean_omega=numbers["mean_omega"],
        use_sigmoid=use_sigmoid,
    )


def save_calibration(result: CalibrationResult, path: PathLike) -> None:
    atomic_write_text(path, dump_calibration(result))
    logger.info(f"Wrote calibration to {path}")


def load_calibration(path: PathLike) -> CalibrationResult:
    return parse_calibration(Path(path).read_text(encoding="utf-8"))
