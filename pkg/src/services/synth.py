"""Synthetic embeddings with a planted quality/score relation.

Each subject gets a random unit centre. A sample of quality q points along
    kappa * centre + sqrt(1 - kappa^2) * u
with u a random unit vector orthogonal to the centre and kappa = cos(angle),
    angle = arccos(max_alignment) + slope * (q_high - q) + noise,
so the angular drift of a sample grows linearly as its quality falls and
genuine scores fall with quality. Directions of different subjects stay
uniformly distributed, so imposter scores do not depend on quality at all.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..models.calibration import CalibConfig
from ..models.embedding import Embedding
from ..models.scoring import ComparisonSet
from ..models.synth import SynthConfig
from ..utils.metrics import ScoreSet, thresholds_at_fmrs
from ..utils.protocol import all_pairs, build_comparison_set

logger = logging.getLogger(__name__)

KAPPA_BOUNDS = (0.05, 0.999)


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


class SyntheticDataGenerator:
    """Deterministic generator of planted-quality embedding sets."""

    def __init__(self, config: SynthConfig):
        self.config = config

    def alignment(self, quality: np.ndarray, noise: np.ndarray) -> np.ndarray:
        """Cosine between a sample and its subject centre."""
        cfg = self.config
        q_high = cfg.quality_range[1]
        angle = np.arccos(cfg.max_alignment) + cfg.genuine_quality_slope * (q_high - quality) + cfg.noise_sd * noise
        return np.clip(np.cos(np.clip(angle, 0.0, np.pi / 2)), *KAPPA_BOUNDS)

    def generate(self) -> List[Embedding]:
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        n, d = cfg.n_samples, cfg.d

        centres = _unit_rows(rng.standard_normal((cfg.n_subjects, d)))
        quality = rng.uniform(*cfg.quality_range, size=n)
        noise = rng.standard_normal(n)
        u = rng.standard_normal((n, d))

        subject = np.repeat(np.arange(cfg.n_subjects), cfg.samples_per_subject)
        c = centres[subject]
        u = _unit_rows(u - np.sum(u * c, axis=1, keepdims=True) * c)
        kappa = self.alignment(quality, noise)
        directions = kappa[:, None] * c + np.sqrt(1.0 - kappa * kappa)[:, None] * u
        vectors = quality[:, None] * directions

        embeddings = []
        for i in range(n):
            s, k = divmod(i, cfg.samples_per_subject)
            embeddings.append(
                Embedding(vector=vectors[i], sample_id=f"s{s:04d}_{k:03d}", subject_id=f"subject{s:04d}")
            )
        logger.info(f"Generated {n} embeddings ({cfg.n_subjects} subjects, d={d}, seed={cfg.seed})")
        return embeddings


def generate(cfg: SynthConfig) -> List[Embedding]:
    """Generate the embedding collection for a synthetic world."""
    return SyntheticDataGenerator(cfg).generate()


def comparison_set(cfg: SynthConfig) -> ComparisonSet:
    """All-pairs comparison set of a synthetic world."""
    embeddings = generate(cfg)
    return build_comparison_set(embeddings, all_pairs(embeddings))


def brute_force_optimum(
    cset: ComparisonSet,
    fmr_targets: Sequence[float],
    omegas: np.ndarray,
    use_sigmoid: bool = True,
) -> List[Tuple[float, float, float]]:
    """Exhaustive per-target optimum over an omega grid.

    Scores the full set for every omega, walking from the largest omega
    down and keeping only strict FNMR improvements. Thresholds are reported
    on the unsquashed omega * q_min + s axis.

    Returns:
        One (threshold, omega_opt, fnmr) per target
    """
    best: List[Optional[Tuple[float, float, float]]] = [None] * len(fmr_targets)
    for omega in np.sort(np.asarray(omegas, dtype=np.float64))[::-1]:
        x = omega * cset.q_min + cset.raw
        score_set = ScoreSet.from_scores(x[cset.is_genuine], x[~cset.is_genuine])
        thresholds = thresholds_at_fmrs(fmr_targets, score_set)
        if use_sigmoid:
            misses = np.searchsorted(expit(score_set.genuine), expit(thresholds), side="left")
        else:
            misses = np.searchsorted(score_set.genuine, thresholds, side="left")
        for j, t in enumerate(thresholds):
            fnmr = int(misses[j]) / score_set.genuine.size
            if best[j] is None or fnmr < best[j][2]:
                best[j] = (float(t), float(omega), fnmr)
    return best


def planted_oracle(
    cfg: SynthConfig,
    fmr_targets: Sequence[float],
    calib: Optional[CalibConfig] = None,
    resolution: int = 10,
) -> List[Tuple[float, float]]:
    """Grid optimum per FMR target on a synthetic world.

    Searches the union of the calibration grid and a grid `resolution`
    times finer, so it is never worse than calibration on the same data.

    Returns:
        One (threshold, omega_opt) per target
    """
    calib = calib or CalibConfig()
    grid = np.union1d(calib.omega_grid.values(), calib.omega_grid.refined(resolution).values())
    optima = brute_force_optimum(comparison_set(cfg), fmr_targets, grid, calib.use_sigmoid)
    return [(t, omega) for t, omega, _ in optima]
