"""Calibration service: learns the quality-weighting function from data.

For every FMR target the service grid-searches the weight omega that gives
the lowest FNMR when pairs are scored as sigmoid(omega * q_min + s). The
threshold is recomputed from the imposter scores for every candidate omega,
so the FMR stays fixed while omega moves. Thresholds are recorded on the
unsquashed omega * q_min + s axis, the axis qa_scores applies the weights on.
The (threshold, omega_opt) points are then fitted with a closed-form
least-squares line, giving (alpha, beta).
"""

import asyncio
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..config import get_thread_limit
from ..exceptions import (
    DegeneratePointsError,
    InsufficientGenuineError,
    InsufficientImpostersError,
    NonPositiveQualityError,
)
from ..models.calibration import CalibConfig, CalibrationPoint, CalibrationResult
from ..models.scoring import ComparisonSet, WeightParams
from ..utils.metrics import realizable_thresholds

logger = logging.getLogger(__name__)

# warn when fewer imposters than this lie above the strictest threshold
MIN_IMPOSTERS_AT_FMR_MIN = 10


def scaled_score(omega: float, s: float, q_min: float, use_sigmoid: bool = True) -> float:
    """Score of a pair under candidate weight omega.

    Examples:
        scaled_score(0.0, 0.0, 20.0) -> 0.5
        scaled_score(-0.05, 0.3, 20.0) -> sigmoid(-0.7) = 0.331812...
    """
    if q_min <= 0:
        raise NonPositiveQualityError(f"q_min must be > 0, got {q_min}")
    x = omega * q_min + s
    return float(expit(x)) if use_sigmoid else x


def _sweep_chunk(
    omegas: np.ndarray,
    genuine: Tuple[np.ndarray, np.ndarray],
    imposter: Tuple[np.ndarray, np.ndarray],
    targets: np.ndarray,
    use_sigmoid: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    """Genuine miss counts and thresholds for each (omega, target).

    Returns:
        (misses, thresholds), both shaped (len(omegas), len(targets))
    """
    gen_raw, gen_q = genuine
    imp_raw, imp_q = imposter
    n_imp = imp_raw.size
    # thresholds only ever come from the top of the imposter distribution
    tail_size = min(n_imp, math.ceil(float(targets.max()) * n_imp) + 2)
    misses = np.empty((omegas.size, targets.size), dtype=np.int64)
    thresholds = np.empty((omegas.size, targets.size), dtype=np.float64)

    for i, omega in enumerate(omegas):
        imp_x = omega * imp_q + imp_raw
        if tail_size < n_imp:
            tail = np.partition(imp_x, n_imp - tail_size)[n_imp - tail_size:]
        else:
            tail = imp_x
        tail = np.sort(tail)
        gen_x = np.sort(omega * gen_q + gen_raw)
        t = realizable_thresholds(tail, n_imp, targets)
        thresholds[i] = t
        if use_sigmoid:
            misses[i] = np.searchsorted(expit(gen_x), expit(t), side="left")
        else:
            misses[i] = np.searchsorted(gen_x, t, side="left")
    return misses, thresholds


def _select_optima(
    grid: np.ndarray,
    misses: np.ndarray,
    thresholds: np.ndarray,
    targets: np.ndarray,
    n_genuine: int,
) -> List[CalibrationPoint]:
    points = []
    last = grid.size - 1
    for j, target in enumerate(targets):
        # among equal minima take the largest grid index, the omega nearest 0
        k = last - int(np.argmin(misses[::-1, j]))
        points.append(
            CalibrationPoint(
                fmr_target=float(target),
                threshold=float(thresholds[k, j]),
                omega_opt=float(grid[k]),
                fnmr=int(misses[k, j]) / n_genuine,
            )
        )
    return points


def _check_set(cset: ComparisonSet, smallest_target: float) -> None:
    n_gen, n_imp = cset.n_genuine, cset.n_imposter
    if n_gen < 2:
        raise InsufficientGenuineError(f"need at least 2 genuine pairs, got {n_gen}")
    if n_imp == 0 or smallest_target < 1 / n_imp:
        raise InsufficientImpostersError(
            f"FMR target {smallest_target:g} needs at least {math.ceil(1 / smallest_target)} "
            f"imposter pairs, got {n_imp}"
        )
    if smallest_target * n_imp < MIN_IMPOSTERS_AT_FMR_MIN:
        logger.warning(
            f"Only {smallest_target * n_imp:.1f} imposter pairs expected above the FMR "
            f"{smallest_target:g} threshold; operating points will be noisy"
        )


def optimal_weight_at_fmr(
    cset: ComparisonSet,
    fmr_target: float,
    cfg: Optional[CalibConfig] = None,
) -> Tuple[float, float, float]:
    """Grid-search the omega minimizing FNMR at a fixed FMR target.

    Returns:
        (omega_opt, threshold, fnmr)

    Raises:
        InsufficientImpostersError: If fmr_target < 1 / number of imposters
    """
    cfg = cfg or CalibConfig()
    _check_set(cset, fmr_target)
    grid = cfg.omega_grid.values()
    targets = np.array([fmr_target], dtype=np.float64)
    genuine, imposter = cset.split()
    misses, thresholds = _sweep_chunk(grid, genuine, imposter, targets, cfg.use_sigmoid)
    point = _select_optima(grid, misses, thresholds, targets, cset.n_genuine)[0]
    return point.omega_opt, point.threshold, point.fnmr


def _fit(points: Sequence[Tuple[float, float]]) -> Tuple[WeightParams, float, float, float]:
    if len(points) < 2:
        raise DegeneratePointsError(f"need at least 2 points to fit a line, got {len(points)}")
    t = np.array([p[0] for p in points], dtype=np.float64)
    w = np.array([p[1] for p in points], dtype=np.float64)
    mean_t = math.fsum(t) / t.size
    mean_w = math.fsum(w) / w.size
    dt = t - mean_t
    dw = w - mean_w
    ss_tt = math.fsum(dt * dt)
    if ss_tt == 0.0:
        raise DegeneratePointsError(f"all {t.size} thresholds are equal ({t[0]!r})")
    beta = math.fsum(dt * dw) / ss_tt
    alpha = beta * mean_t - mean_w

    ss_tot = math.fsum(dw * dw)
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        residual = w - (beta * t - alpha)
        r2 = 1.0 - math.fsum(residual * residual) / ss_tot
        r2 = min(1.0, max(0.0, r2))
    return WeightParams(alpha=alpha, beta=beta), r2, mean_t, mean_w


def fit_linear(points: Sequence[Tuple[float, float]]) -> WeightParams:
    """Least-squares line omega = beta * t - alpha through (t, omega) points.

    Examples:
        points on omega = 0.1 * t - 0.05 -> alpha 0.05, beta 0.1
        [(0, 0), (1, 1)] -> alpha 0, beta 1

    Raises:
        DegeneratePointsError: With fewer than 2 points or zero threshold variance
    """
    return _fit(points)[0]


class CalibrationService:
    """Runs the omega grid search concurrently and fits the weighting line."""

    def __init__(self, config: Optional[CalibConfig] = None, max_threads: Optional[int] = None):
        """Initialize calibration service.

        Args:
            config: Calibration settings (defaults if None)
            max_threads: Worker thread cap (QAV_THREADS or CPU count if None)
        """
        self.config = config or CalibConfig()
        self.max_threads = max_threads or get_thread_limit()

    async def sweep(self, cset: ComparisonSet) -> List[CalibrationPoint]:
        """Optimal (threshold, omega) point for every configured FMR target.

        Points come back in ascending FMR-target order.
        """
        cfg = self.config
        targets = cfg.fmr_targets()
        _check_set(cset, float(targets[0]))
        grid = cfg.omega_grid.values()
        genuine, imposter = cset.split()

        n_chunks = min(self.max_threads, grid.size)
        chunks = np.array_split(grid, n_chunks)
        semaphore = asyncio.Semaphore(self.max_threads)

        async def run_chunk(omegas: np.ndarray):
            async with semaphore:
                return await asyncio.to_thread(
                    _sweep_chunk, omegas, genuine, imposter, targets, cfg.use_sigmoid
                )

        logger.info(
            f"Sweeping {grid.size} weights x {targets.size} FMR targets over "
            f"{cset.n_genuine} genuine / {cset.n_imposter} imposter pairs in {n_chunks} chunks"
        )
        results = await asyncio.gather(*(run_chunk(c) for c in chunks))
        misses = np.concatenate([r[0] for r in results])
        thresholds = np.concatenate([r[1] for r in results])
        return _select_optima(grid, misses, thresholds, targets, cset.n_genuine)

    async def calibrate(self, cset: ComparisonSet) -> CalibrationResult:
        """Learn WeightParams from a comparison set."""
        points = await self.sweep(cset)
        params, r2, mean_t, mean_omega = _fit([(p.threshold, p.omega_opt) for p in points])
        result = CalibrationResult(
            params=params,
            points=points,
            fit_r2=r2,
            mean_t=mean_t,
            mean_omega=mean_omega,
            use_sigmoid=self.config.use_sigmoid,
        )
        if not result.beta_positive:
            logger.warning(f"Fitted beta is not positive ({params.beta:g}); weighting is flat or inverted")
        if not result.thresholds_monotone:
            logger.warning("Calibrated thresholds increase with the FMR target at some points")
        logger.info(f"Calibrated alpha={params.alpha:.6f} beta={params.beta:.6f} r2={r2:.4f}")
        return result


def calibrate(cset: ComparisonSet, cfg: Optional[CalibConfig] = None) -> CalibrationResult:
    """Synchronous wrapper around CalibrationService.calibrate."""
    return asyncio.run(CalibrationService(cfg).calibrate(cset))
