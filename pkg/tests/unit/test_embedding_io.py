"""Tests for the embedding file encodings."""

import numpy as np
import pytest

from src.exceptions import (
    DimensionMismatchError,
    DuplicateIdError,
    NonFiniteError,
    ParseError,
    ZeroNormError,
)
from src.models.embedding import Embedding
from src.utils.embedding_io import (
    MAGIC,
    format_binary,
    format_text,
    load_embeddings,
    parse_binary,
    parse_text,
    write_embeddings,
)


@pytest.fixture
def embeddings(rng):
    vectors = rng.standard_normal((5, 8)) * 20
    subjects = ["p1", "p1", None, "p2", "p2"]
    return [
        Embedding(vector=v, sample_id=f"s{i}", subject_id=subject)
        for i, (v, subject) in enumerate(zip(vectors, subjects))
    ]


class TestTextEncoding:
    """Tests for the text encoding."""

    def test_round_trip_is_exact(self, embeddings, tmp_path):
        path = tmp_path / "emb.txt"
        write_embeddings(embeddings, path)
        assert load_embeddings(path) == embeddings

    def test_missing_subject(self, embeddings):
        text = format_text(embeddings)
        assert text.splitlines()[3].split()[1] == "-"
        assert parse_text(text)[2].subject_id is None

    def test_header_count_mismatch(self):
        with pytest.raises(ParseError) as exc:
            parse_text("2 3\na p 1 0\nb p 0 1\n")
        assert exc.value.row == 1

    def test_wrong_dimension_has_row(self):
        with pytest.raises(DimensionMismatchError) as exc:
            parse_text("2 2\na p 1 0\nb p 0 1 5\n")
        assert exc.value.row == 3

    def test_non_numeric_has_row(self):
        with pytest.raises(ParseError) as exc:
            parse_text("2 1\na p 1 x\n")
        assert exc.value.row == 2

    @pytest.mark.parametrize(
        "record, error",
        [("b p 0 0", ZeroNormError), ("b p nan 1", NonFiniteError), ("b p inf 1", NonFiniteError)],
    )
    def test_invalid_vector_has_row(self, record, error):
        with pytest.raises(error) as exc:
            parse_text(f"2 2\na p 1 0\n{record}\n")
        assert exc.value.row == 3
        assert str(exc.value).startswith("row 3: ")

    def test_duplicate_sample(self):
        with pytest.raises(DuplicateIdError) as exc:
            parse_text("2 2\na p 1 0\na q 0 1\n")
        assert exc.value.row == 3

    def test_empty_file(self):
        with pytest.raises(ParseError):
            parse_text("")

    def test_id_with_space_rejected(self):
        with pytest.raises(ParseError):
            format_text([Embedding(vector=[1.0], sample_id="a b")])


class TestBinaryEncoding:
    """Tests for the binary encoding."""

    def test_round_trip(self, embeddings, tmp_path):
        path = tmp_path / "emb.qmef"
        write_embeddings(embeddings, path)
        assert path.read_bytes()[:4] == MAGIC
        loaded = load_embeddings(path)
        assert [e.sample_id for e in loaded] == [e.sample_id for e in embeddings]
        assert [e.subject_id for e in loaded] == [e.subject_id for e in embeddings]
        for a, b in zip(loaded, embeddings):
            np.testing.assert_array_equal(a.vector, b.vector.astype(np.float32))

    def test_text_of_binary_is_identical(self, embeddings, tmp_path):
        """Test float32 data read from binary survives the text encoding unchanged."""
        binary = parse_binary(format_binary(embeddings))
        path = tmp_path / "again.txt"
        write_embeddings(binary, path)
        assert load_embeddings(path) == binary
        assert parse_binary(format_binary(binary)) == binary

    def test_explicit_format_overrides_suffix(self, embeddings, tmp_path):
        path = tmp_path / "emb.txt"
        write_embeddings(embeddings, path, binary=True)
        assert path.read_bytes()[:4] == MAGIC

    def test_bad_magic(self, embeddings):
        data = b"XXXX" + format_binary(embeddings)[4:]
        with pytest.raises(ParseError) as exc:
            parse_binary(data)
        assert exc.value.row == 1

    def test_truncated(self, embeddings):
        data = format_binary(embeddings)
        with pytest.raises(ParseError) as exc:
            parse_binary(data[:-3])
        assert exc.value.row == 5

    def test_trailing_bytes(self, embeddings):
        with pytest.raises(ParseError):
            parse_binary(format_binary(embeddings) + b"\0")

    def test_zero_vector_has_row(self):
        data = bytearray(format_binary([
            Embedding(vector=[1.0, 0.0], sample_id="a"),
            Embedding(vector=[0.0, 1.0], sample_id="b"),
        ]))
        data[-4:] = b"\0\0\0\0"
        with pytest.raises(ZeroNormError) as exc:
            parse_binary(bytes(data))
        assert exc.value.row == 2


def test_write_empty_collection(tmp_path):
    with pytest.raises(ParseError):
        write_embeddings([], tmp_path / "e.txt")


def test_write_mixed_dimensions(tmp_path):
    mixed = [Embedding(vector=[1.0, 0.0], sample_id="a"), Embedding(vector=[1.0], sample_id="b")]
    with pytest.raises(DimensionMismatchError) as exc:
        write_embeddings(mixed, tmp_path / "e.txt")
    assert exc.value.index == 1
