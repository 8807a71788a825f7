import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hzsl import errors
from hzsl.attributes import (AttributeTable, cosine_similarity, load_embeddings,
                             normalize_token, save_embeddings)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_basic(tmp_path):
    p = _write(tmp_path / "emb.txt", "2 3\nfoo 1.0 2.0 3.0\nbar 0.5 0.5 0.5\n")
    table = load_embeddings(p, {"foo": 0, "bar": 1})
    assert table.dim == 3
    assert len(table) == 2
    np.testing.assert_array_equal(table[0], [1.0, 2.0, 3.0])


def test_missing_label(tmp_path):
    p = _write(tmp_path / "emb.txt", "1 2\nfoo 1.0 2.0\n")
    with pytest.raises(errors.MissingLabel) as exc:
        load_embeddings(p, {"foo": 0, "absent": 1})
    assert exc.value.label == "absent"


def test_dimension_mismatch_names_line(tmp_path):
    p = _write(tmp_path / "emb.txt", "2 3\nfoo 1.0 2.0 3.0\nbar 1.0 2.0\n")
    with pytest.raises(errors.DimensionMismatch) as exc:
        load_embeddings(p, {"foo": 0})
    assert ":3:" in str(exc.value)


def test_malformed_header(tmp_path):
    p = _write(tmp_path / "emb.txt", "not a header\nfoo 1.0\n")
    with pytest.raises(errors.MalformedHeader):
        load_embeddings(p, {"foo": 0})


def test_multiword_labels_match_underscored_tokens(tmp_path):
    p = _write(tmp_path / "emb.txt", "1 2\nsea_lion 1.0 -1.0\n")
    table = load_embeddings(p, {"sea lion": 4})
    np.testing.assert_array_equal(table[4], [1.0, -1.0])
    assert normalize_token("sea lion") == "sea_lion"


def test_zero_vector_rejected_at_build():
    with pytest.raises(errors.ZeroVector):
        AttributeTable({0: np.zeros(3)})


def test_cosine_basics():
    u = np.array([1.0, 2.0, -3.0])
    assert cosine_similarity(u, u) == pytest.approx(1.0)
    assert cosine_similarity(u, -u) == pytest.approx(-1.0)
    assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)


def test_cosine_zero_vector():
    with pytest.raises(errors.ZeroVector):
        cosine_similarity([0.0, 0.0], [1.0, 0.0])


def test_cosine_dimension_mismatch():
    with pytest.raises(errors.DimensionMismatch):
        cosine_similarity([1.0], [1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=2, max_size=6),
    st.floats(-3, 3).filter(lambda a: abs(a) > 1e-3),
    st.floats(-3, 3).filter(lambda b: abs(b) > 1e-3),
)
def test_cosine_scaling_property(vec, alpha, beta):
    u = np.asarray(vec)
    if not u.any():
        return
    v = u[::-1].copy()
    if not v.any():
        return
    base = cosine_similarity(u, v)
    scaled = cosine_similarity(alpha * u, beta * v)
    assert scaled == pytest.approx(np.sign(alpha * beta) * base, abs=1e-9)


def test_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(1)
    table = AttributeTable({i: rng.normal(size=5) for i in range(4)})
    names = {i: f"label {i}" for i in range(4)}
    path = tmp_path / "emb.txt"
    save_embeddings(path, table, names)
    again = load_embeddings(path, {names[i]: i for i in range(4)})
    for i in range(4):
        np.testing.assert_array_equal(again[i], table[i])


def test_roundtrip_nine_significant_digits(tmp_path):
    table = AttributeTable({0: np.array([0.123456789, -9.87654321e-5])})
    path = tmp_path / "emb.txt"
    save_embeddings(path, table, {0: "x"})
    again = load_embeddings(path, {"x": 0})
    np.testing.assert_array_equal(again[0], table[0])


def test_matrix_missing_attribute():
    table = AttributeTable({0: np.ones(2)})
    with pytest.raises(errors.MissingAttribute):
        table.matrix([0, 7])
