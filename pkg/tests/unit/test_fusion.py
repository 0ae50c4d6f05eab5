"""Tests for template fusion."""

import numpy as np
import pytest

from src.exceptions import CancellationError
from src.models.embedding import QualityEmbedding, Template
from src.utils.fusion import aggregate, aggregate_all


def frame(direction, quality, subject_id=None):
    d = np.asarray(direction, dtype=np.float64)
    return QualityEmbedding(direction=d / np.linalg.norm(d), quality=quality, subject_id=subject_id)


def random_template(rng, n_frames, d=16, template_id="t"):
    # frames share a mean direction so they cannot cancel
    center = rng.standard_normal(d)
    frames = []
    for _ in range(n_frames):
        frames.append(frame(center + 0.5 * rng.standard_normal(d), float(rng.uniform(5, 120))))
    return Template(frames=tuple(frames), template_id=template_id)


class TestAggregate:
    """Tests for aggregate."""

    def test_shared_direction(self):
        """Test qualities 10 and 30 along one direction fuse to quality 25."""
        u = [0.6, 0.8, 0.0]
        fused = aggregate(Template(frames=(frame(u, 10.0), frame(u, 30.0)), template_id="t"))
        np.testing.assert_allclose(fused.direction, [0.6, 0.8, 0.0], atol=1e-14)
        assert fused.quality == pytest.approx(25.0, abs=1e-12)
        assert fused.sample_id == "t"

    def test_orthogonal_equal_quality(self):
        fused = aggregate(Template(frames=(frame([1, 0], 10.0), frame([0, 1], 10.0)), template_id="t"))
        np.testing.assert_allclose(fused.direction, [2 ** -0.5, 2 ** -0.5], atol=1e-15)
        assert fused.quality == 10.0

    def test_single_frame_is_identity(self):
        f = frame([1.0, 2.0, 2.0], 42.0, subject_id="p")
        fused = aggregate(Template(frames=(f,), template_id="t"))
        np.testing.assert_array_equal(fused.direction, f.direction)
        assert fused.quality == 42.0
        assert fused.subject_id == "p"

    def test_repeated_frame_is_exact(self):
        f = frame([0.3, -1.0, 2.2, 0.1], 17.5)
        fused = aggregate(Template(frames=(f, f, f), template_id="t"))
        np.testing.assert_array_equal(fused.direction, f.direction)
        assert fused.quality == 17.5

    def test_cancellation(self):
        with pytest.raises(CancellationError):
            aggregate(Template(frames=(frame([1, 0], 5.0), frame([-1, 0], 5.0)), template_id="t"))

    def test_mixed_subjects_drop_subject(self):
        fused = aggregate(
            Template(frames=(frame([1, 0], 5.0, "a"), frame([1, 1], 5.0, "b")), template_id="t")
        )
        assert fused.subject_id is None

    def test_high_quality_frame_dominates(self):
        fused = aggregate(Template(frames=(frame([1, 0], 100.0), frame([0, 1], 1.0)), template_id="t"))
        assert fused.direction[0] > 0.99


class TestAggregateProperties:
    """Properties of aggregate on 100 random templates."""

    @pytest.fixture
    def templates(self, rng):
        return [random_template(rng, int(rng.integers(1, 12)), template_id=f"t{i}") for i in range(100)]

    def test_permutation_invariant(self, templates, rng):
        for t in templates:
            order = rng.permutation(len(t.frames))
            shuffled = Template(frames=tuple(t.frames[i] for i in order), template_id="t")
            a, b = aggregate(t), aggregate(shuffled)
            np.testing.assert_allclose(a.direction, b.direction, rtol=0, atol=1e-12)
            assert a.quality == pytest.approx(b.quality, abs=1e-12)

    def test_quality_within_frame_range(self, templates):
        for t in templates:
            qualities = [f.quality for f in t.frames]
            fused = aggregate(t)
            assert min(qualities) <= fused.quality <= max(qualities)

    def test_unit_direction(self, templates):
        for t in templates:
            assert np.linalg.norm(aggregate(t).direction) == pytest.approx(1.0, abs=1e-12)

    def test_inside_cone_of_frames(self, templates):
        """Test the fused direction is closer to the frames than the worst frame pair."""
        for t in templates:
            fused = aggregate(t).direction
            directions = np.stack([f.direction for f in t.frames])
            worst_pair = (directions @ directions.T).min()
            if worst_pair < 0:
                continue
            assert (directions @ fused).min() >= worst_pair - 1e-12

    def test_idempotent(self, templates):
        """Test fusing a fused result again changes nothing."""
        for t in templates:
            once = aggregate(t)
            twice = aggregate(Template(frames=(once,), template_id=t.template_id))
            np.testing.assert_array_equal(twice.direction, once.direction)
            assert twice.quality == once.quality


def test_aggregate_all_keeps_order(rng):
    templates = [random_template(rng, 3, template_id=name) for name in ("b", "a", "c")]
    assert [e.sample_id for e in aggregate_all(templates)] == ["b", "a", "c"]
