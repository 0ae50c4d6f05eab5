"""Command-line front end: synth, calibrate, eval, fuse, sweep, surface.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

import argparse
import asyncio
import json
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import ValidationError

from . import __version__
from .config import get_log_level
from .exceptions import QualityVerifyError
from .models.calibration import CalibConfig, OmegaGrid
from .models.report import RunManifest
from .models.scoring import WeightParams
from .models.synth import SynthConfig
from .services.calibration import CalibrationService
from .services.evaluation import evaluate, quality_bin_stats
from .services.synth import SyntheticDataGenerator
from .utils.embedding_io import BINARY_SUFFIX, load_embeddings, write_embeddings
from .utils.metrics import REPORT_FMR_TARGETS
from .utils.protocol import (
    all_pairs,
    build_comparison_set,
    build_templates,
    load_comparison_set,
    load_template_manifest,
    write_protocol,
)
from .utils.fusion import aggregate_all
from .utils.qscore import REFERENCE_PARAMS, score_surface
from .utils.tables import (
    atomic_write_text,
    file_digest,
    load_calibration,
    points_frame,
    save_calibration,
    write_tsv,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
MANIFEST_NAME = "manifest.json"


class UsageError(Exception):
    """Raised for flag combinations argparse cannot check."""
    pass


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value!r}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {number}")
    return number


def non_negative_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {value!r}")
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {number}")
    return number


def unit_interval(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"must be a number in (0, 1), got {value!r}")
    if not 0.0 < number < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {number}")
    return number


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, type=Path, help="Output directory.")
    parser.add_argument("--log-level", default=None, help="Logging level (default: QAV_LOG_LEVEL or INFO).")


def _add_dataset(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embeddings", required=True, type=Path, help="Embedding file (text or binary).")
    parser.add_argument(
        "--protocol",
        default=None,
        type=Path,
        help="Pair protocol CSV (a,b,label). All pairs by subject when omitted.",
    )


def _add_calibration_flags(parser: argparse.ArgumentParser) -> None:
    defaults = CalibConfig()
    grid = defaults.omega_grid
    parser.add_argument("--fmr-min", type=unit_interval, default=defaults.fmr_min, help="Lowest FMR target.")
    parser.add_argument("--fmr-max", type=unit_interval, default=defaults.fmr_max, help="Highest FMR target.")
    parser.add_argument(
        "--fmr-points", type=positive_int, default=defaults.n_fmr_points, help="Number of log-spaced FMR targets."
    )
    parser.add_argument("--omega-lo", type=float, default=grid.low, help="Lower bound of the weight grid.")
    parser.add_argument("--omega-hi", type=float, default=grid.high, help="Upper bound of the weight grid (<= 0).")
    parser.add_argument("--omega-steps", type=positive_int, default=grid.steps, help="Number of grid points.")
    parser.add_argument(
        "--no-sigmoid", action="store_true", help="Search and fit on raw instead of sigmoid-scaled scores."
    )


def _add_params_source(parser: argparse.ArgumentParser, required: bool) -> None:
    source = parser.add_mutually_exclusive_group(required=required)
    source.add_argument("--calibration", type=Path, default=None, help="Calibration file from 'calibrate'.")
    source.add_argument("--preset", choices=sorted(REFERENCE_PARAMS), default=None, help="Reference parameters.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qav", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="Generate a synthetic planted-quality dataset.")
    defaults = SynthConfig()
    synth.add_argument("--seed", type=non_negative_int, default=defaults.seed, help="Random seed.")
    synth.add_argument("--subjects", type=positive_int, default=defaults.n_subjects, help="Number of subjects.")
    synth.add_argument(
        "--per-subject", type=positive_int, default=defaults.samples_per_subject, help="Samples per subject."
    )
    synth.add_argument("--dim", type=positive_int, default=defaults.d, help="Embedding dimension (>= 2).")
    synth.add_argument("--q-low", type=float, default=defaults.quality_range[0], help="Lowest quality.")
    synth.add_argument("--q-high", type=float, default=defaults.quality_range[1], help="Highest quality.")
    synth.add_argument(
        "--slope", type=float, default=defaults.genuine_quality_slope, help="Angular drift (radians) per quality unit."
    )
    synth.add_argument("--noise-sd", type=float, default=defaults.noise_sd, help="Angular noise (radians).")
    synth.add_argument(
        "--max-alignment", type=float, default=defaults.max_alignment, help="Alignment at the highest quality."
    )
    synth.add_argument("--format", choices=["text", "binary"], default="text", help="Embedding encoding.")
    _add_common(synth)

    calibrate = commands.add_parser("calibrate", help="Learn the quality-weighting parameters.")
    _add_dataset(calibrate)
    _add_calibration_flags(calibrate)
    _add_common(calibrate)

    evaluation = commands.add_parser("eval", help="Report raw and quality-aware verification performance.")
    _add_dataset(evaluation)
    _add_params_source(evaluation, required=False)
    evaluation.add_argument(
        "--fmr-targets",
        type=unit_interval,
        nargs="+",
        default=list(REPORT_FMR_TARGETS),
        help="FMR targets for the FNMR ladder.",
    )
    _add_common(evaluation)

    fuse = commands.add_parser("fuse", help="Fuse templates by quality-weighted aggregation.")
    fuse.add_argument("--embeddings", required=True, type=Path, help="Frame embedding file.")
    fuse.add_argument("--templates", required=True, type=Path, help="Template manifest CSV (template_id,sample_id).")
    fuse.add_argument("--format", choices=["text", "binary"], default="text", help="Output encoding.")
    _add_common(fuse)

    sweep = commands.add_parser("sweep", help="Optimal-weight sweeps over several datasets.")
    sweep.add_argument("--embeddings", required=True, type=Path, nargs="+", help="Embedding files.")
    sweep.add_argument(
        "--protocol", type=Path, nargs="*", default=None, help="One protocol per embedding file (optional)."
    )
    _add_calibration_flags(sweep)
    _add_common(sweep)

    surface = commands.add_parser("surface", help="Quality-aware score over a (score, quality) grid.")
    _add_params_source(surface, required=True)
    surface.add_argument("--s-steps", type=positive_int, default=201, help="Score grid points over [-1, 1].")
    surface.add_argument("--q-low", type=float, default=10.0, help="Lowest quality.")
    surface.add_argument("--q-high", type=float, default=110.0, help="Highest quality.")
    surface.add_argument("--q-steps", type=positive_int, default=101, help="Quality grid points.")
    _add_common(surface)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _calib_config(args: argparse.Namespace) -> CalibConfig:
    try:
        return CalibConfig(
            fmr_min=args.fmr_min,
            fmr_max=args.fmr_max,
            n_fmr_points=args.fmr_points,
            omega_grid=OmegaGrid(low=args.omega_lo, high=args.omega_hi, steps=args.omega_steps),
            use_sigmoid=not args.no_sigmoid,
        )
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc


def _synth_config(args: argparse.Namespace) -> SynthConfig:
    try:
        return SynthConfig(
            seed=args.seed,
            n_subjects=args.subjects,
            samples_per_subject=args.per_subject,
            d=args.dim,
            quality_range=(args.q_low, args.q_high),
            genuine_quality_slope=args.slope,
            noise_sd=args.noise_sd,
            max_alignment=args.max_alignment,
        )
    except ValidationError as exc:
        raise UsageError(str(exc)) from exc


def _params(args: argparse.Namespace) -> Optional[WeightParams]:
    if args.calibration is not None:
        return load_calibration(args.calibration).params
    if args.preset is not None:
        return REFERENCE_PARAMS[args.preset]
    return None


def _dataset_names(paths: Sequence[Path]) -> List[str]:
    names: List[str] = []
    for i, path in enumerate(paths):
        name = path.stem
        names.append(name if name not in names else f"{name}_{i}")
    return names


def cmd_synth(args: argparse.Namespace) -> List[Path]:
    cfg = _synth_config(args)
    embeddings = SyntheticDataGenerator(cfg).generate()
    protocol = all_pairs(embeddings)
    cset = build_comparison_set(embeddings, protocol)

    emb_path = args.out / ("embeddings" + (BINARY_SUFFIX if args.format == "binary" else ".txt"))
    write_embeddings(embeddings, emb_path, binary=args.format == "binary")
    protocol_path = args.out / "protocol.csv"
    write_protocol(protocol, protocol_path)
    bins_path = args.out / "quality_bins.tsv"
    edges = np.linspace(args.q_low, args.q_high, 11)
    edges[-1] = np.nextafter(args.q_high, np.inf)
    write_tsv(quality_bin_stats(cset, edges), bins_path)
    return [emb_path, protocol_path, bins_path]


def cmd_calibrate(args: argparse.Namespace) -> List[Path]:
    cfg = _calib_config(args)
    cset = load_comparison_set(args.embeddings, args.protocol)
    result = asyncio.run(CalibrationService(cfg).calibrate(cset))

    calibration_path = args.out / "calibration.txt"
    save_calibration(result, calibration_path)
    points_path = args.out / "points.tsv"
    write_tsv(points_frame(result, _dataset_names([args.embeddings])[0]), points_path)
    return [calibration_path, points_path]


def cmd_eval(args: argparse.Namespace) -> List[Path]:
    params = _params(args)
    if params is not None:
        args.params_used = params.model_dump()
    cset = load_comparison_set(args.embeddings, args.protocol)
    result = evaluate(cset, params, args.fmr_targets)

    report_path = args.out / "report.tsv"
    write_tsv(result.report_table(), report_path)
    roc_path = args.out / "roc.tsv"
    write_tsv(result.roc, roc_path)
    return [report_path, roc_path]


def cmd_fuse(args: argparse.Namespace) -> List[Path]:
    embeddings = load_embeddings(args.embeddings)
    templates = build_templates(embeddings, load_template_manifest(args.templates))
    fused = [q.recompose() for q in aggregate_all(templates)]
    binary = args.format == "binary"
    path = args.out / ("fused" + (BINARY_SUFFIX if binary else ".txt"))
    write_embeddings(fused, path, binary=binary)
    return [path]


async def _sweep_all(sets, cfg: CalibConfig):
    service = CalibrationService(cfg)
    return await asyncio.gather(*(service.calibrate(cset) for cset in sets))


def cmd_sweep(args: argparse.Namespace) -> List[Path]:
    protocols = args.protocol or [None] * len(args.embeddings)
    if len(protocols) != len(args.embeddings):
        raise UsageError(
            f"--protocol given {len(protocols)} times for {len(args.embeddings)} --embeddings files"
        )
    cfg = _calib_config(args)
    names = _dataset_names(args.embeddings)
    sets = [load_comparison_set(e, p) for e, p in zip(args.embeddings, protocols)]
    results = asyncio.run(_sweep_all(sets, cfg))

    points_path = args.out / "points.tsv"
    write_tsv(pd.concat([points_frame(r, n) for r, n in zip(results, names)], ignore_index=True), points_path)
    fits = pd.DataFrame(
        [(n, r.params.alpha, r.params.beta, r.fit_r2) for n, r in zip(names, results)],
        columns=["dataset", "alpha", "beta", "fit_r2"],
    )
    fits_path = args.out / "fits.tsv"
    write_tsv(fits, fits_path)
    return [points_path, fits_path]


def cmd_surface(args: argparse.Namespace) -> List[Path]:
    params = _params(args)
    args.params_used = params.model_dump()
    if not 0 < args.q_low < args.q_high:
        raise UsageError(f"need 0 < --q-low < --q-high, got {args.q_low}, {args.q_high}")
    table = score_surface(
        params,
        np.linspace(-1.0, 1.0, args.s_steps),
        np.linspace(args.q_low, args.q_high, args.q_steps),
    )
    path = args.out / "surface.tsv"
    write_tsv(table, path)
    return [path]


COMMANDS = {
    "synth": cmd_synth,
    "calibrate": cmd_calibrate,
    "eval": cmd_eval,
    "fuse": cmd_fuse,
    "sweep": cmd_sweep,
    "surface": cmd_surface,
}


def _config_echo(args: argparse.Namespace) -> Dict:
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in ("command", "log_level", "out"):
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, list):
            value = [str(v) if isinstance(v, Path) else v for v in value]
        echo[key] = value
    return echo


def _input_paths(args: argparse.Namespace) -> List[Path]:
    paths = []
    for key in ("embeddings", "protocol", "calibration", "templates"):
        value = getattr(args, key, None)
        if value is None:
            continue
        paths.extend(value if isinstance(value, list) else [value])
    return paths


def write_manifest(args: argparse.Namespace, outputs: List[Path], started: float) -> Path:
    manifest = RunManifest(
        command=args.command,
        config=_config_echo(args),
        input_digests={str(p): file_digest(p) for p in _input_paths(args)},
        outputs={p.name: file_digest(p) for p in outputs},
        version=__version__,
        duration_seconds=time.perf_counter() - started,
    )
    path = args.out / MANIFEST_NAME
    atomic_write_text(path, json.dumps(manifest.model_dump(), indent=2, sort_keys=True) + "\n")
    return path


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    level = (args.log_level or get_log_level()).upper()
    if not isinstance(logging.getLevelName(level), int):
        print(f"qav {args.command}: error: unknown log level {level!r}", file=sys.stderr)
        return 2
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)
    started = time.perf_counter()
    try:
        outputs = COMMANDS[args.command](args)
        write_manifest(args, outputs, started)
    except UsageError as exc:
        print(f"qav {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (QualityVerifyError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    logger.info(f"{args.command} finished in {time.perf_counter() - started:.2f}s; outputs in {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
