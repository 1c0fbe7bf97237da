import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from billfate.embeddings import (EmbeddingTable, generate_synthetic_embeddings, load_embeddings,
                                 pool_average, save_embeddings, tokenize)
from billfate.errors import CorpusParseError


@pytest.mark.parametrize("text,tokens", [
    ("The Finance Bill, 2018", ["the", "finance", "bill", "2018"]),
    ("", []),
    ("a--b", ["a", "b"]),
    ("  Énergie_nouvelle (No. 2) ", ["énergie", "nouvelle", "no", "2"]),
])
def test_tokenize(text, tokens):
    assert tokenize(text) == tokens


def test_load_two_lines(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("finance 0.1 0.2 0.3\nbill -1 0 1e-3\n")
    t = load_embeddings(p, 3)
    assert (t.vocab_size, t.dim) == (2, 3)
    np.testing.assert_array_equal(t["bill"], [-1.0, 0.0, 1e-3])


def test_dimension_mismatch(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("ok " + " ".join(["0.5"] * 100) + "\nshort " + " ".join(["0.5"] * 99) + "\n")
    with pytest.raises(CorpusParseError, match="dimension mismatch.*line 2"):
        load_embeddings(p, 100)


def test_unparseable_number(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("a 1 2\nb 1 x\n")
    with pytest.raises(CorpusParseError, match="unparseable"):
        load_embeddings(p, 2)


def test_duplicate_token_keeps_first(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("a 1 2\nb 3 4\na 5 6\n")
    t = load_embeddings(p, 2)
    assert t.vocab_size == 2 and t.duplicate_warnings == 1
    np.testing.assert_array_equal(t["a"], [1.0, 2.0])


def test_pool_single_token_is_exact(tiny_table):
    np.testing.assert_array_equal(pool_average(["finance"], tiny_table), tiny_table["finance"])


def test_pool_two_tokens_is_mean(tiny_table):
    np.testing.assert_array_equal(pool_average(["finance", "bill"], tiny_table), [2.0, 2.0, 1.0])


def test_pool_all_oov_is_zero(tiny_table):
    out = pool_average(["x", "y"], tiny_table)
    np.testing.assert_array_equal(out, np.zeros(3))
    np.testing.assert_array_equal(pool_average([], tiny_table), np.zeros(3))


def test_pool_skips_oov(tiny_table):
    np.testing.assert_array_equal(pool_average(["zzz", "bill"], tiny_table), tiny_table["bill"])


@pytest.fixture(scope="module")
def rand_table():
    return generate_synthetic_embeddings([f"t{i}" for i in range(30)], 5, seed=4)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([f"t{i}" for i in range(30)] + ["oov1", "oov2"]), max_size=25), st.randoms())
def test_pool_properties(rand_table, tokens, rnd):
    shuffled = list(tokens)
    rnd.shuffle(shuffled)
    a, b = pool_average(tokens, rand_table), pool_average(shuffled, rand_table)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
    used = [rand_table[t] for t in tokens if t in rand_table]
    bound = max((np.abs(v).max() for v in used), default=0.0)
    assert np.abs(a).max() <= bound + 1e-12


def test_save_load_bit_exact(tmp_path, rand_table):
    save_embeddings(rand_table, tmp_path / "e.txt")
    back = load_embeddings(tmp_path / "e.txt", rand_table.dim)
    assert back.index == rand_table.index
    assert np.array_equal(back.vectors, rand_table.vectors)


def test_table_from_dict_rejects_empty_token():
    with pytest.raises(ValueError):
        EmbeddingTable.from_dict({"": [1.0]})
