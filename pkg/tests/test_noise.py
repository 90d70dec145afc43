import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nerkit.corpus import Corpus, Sentence, Token
from nerkit.noise import (
    OPS,
    NoiseConfig,
    corpus_alphabet,
    corrupt_corpus,
    corrupt_word,
    read_membership,
    write_membership,
)
from nerkit.synthetic import generate_corpus

from strategies import random_corpus


def test_swap_on_two_chars():
    cfg = NoiseConfig(rate=1.0, ops=("swap-adjacent",))
    assert corrupt_word("ab", cfg, random.Random(0)) == "ba"


def test_single_char_fallbacks_substitute():
    for op in ("swap-adjacent", "delete-char"):
        cfg = NoiseConfig(rate=1.0, ops=(op,), alphabet="xyz")
        for seed in range(20):
            out = corrupt_word("a", cfg, random.Random(seed))
            assert len(out) == 1 and out in "xyz"


@given(st.text(alphabet="abcdef", min_size=1, max_size=12), st.integers(0, 2**32))
def test_op_length_effects(word, seed):
    for op, delta in [("delete-char", -1), ("duplicate-char", 1), ("substitute-char", 0), ("swap-adjacent", 0)]:
        out = corrupt_word(word, NoiseConfig(ops=(op,)), random.Random(seed))
        if len(word) == 1 and op in ("delete-char", "swap-adjacent"):
            delta = 0
        assert len(out) == len(word) + delta
        if op == "swap-adjacent" and len(word) > 1:
            assert sorted(out) == sorted(word)


def test_swap_changes_words_with_distinct_neighbours():
    cfg = NoiseConfig(ops=("swap-adjacent",))
    rng = random.Random(3)
    for word in ["abc", "xyzw", "ab"]:
        for _ in range(20):
            assert corrupt_word(word, cfg, rng) != word


def test_rate_zero_is_identity():
    corpus = generate_corpus(30, seed=2)
    noisy, ids = corrupt_corpus(corpus, NoiseConfig(rate=0.0, seed=9))
    assert noisy == corpus and ids == frozenset()


def test_rate_one_delete_marks_every_sentence():
    corpus = generate_corpus(30, seed=2)
    noisy, ids = corrupt_corpus(corpus, NoiseConfig(rate=1.0, ops=("delete-char",)))
    multi = {s.id for s in corpus if any(len(t.text) > 1 for t in s.tokens)}
    assert multi <= ids


@settings(max_examples=40)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_membership_is_exactly_changed_sentences(seed, rate):
    corpus = random_corpus(random.Random(seed), 5)
    noisy, ids = corrupt_corpus(corpus, NoiseConfig(rate=rate, seed=seed))
    assert noisy.ids == corpus.ids
    for before, after in zip(corpus, noisy):
        assert before.tags == after.tags
        assert before.domain == after.domain
        assert len(before) == len(after)
        assert all(w for w in after.words)
        assert (before.words != after.words) == (before.id in ids)


def test_deterministic_per_seed():
    corpus = generate_corpus(40, seed=1)
    a = corrupt_corpus(corpus, NoiseConfig(rate=0.3, seed=5))
    b = corrupt_corpus(corpus, NoiseConfig(rate=0.3, seed=5))
    c = corrupt_corpus(corpus, NoiseConfig(rate=0.3, seed=6))
    assert a == b
    assert a != c


def test_selected_token_count_is_binomial():
    # duplication always changes the word, so changed tokens == selected tokens
    tokens = tuple(Token(f"w{i:05d}abcdefg") for i in range(4000))
    corpus = Corpus((Sentence("big", tokens),))
    rate = 0.3
    noisy, _ = corrupt_corpus(corpus, NoiseConfig(rate=rate, ops=("duplicate-char",), seed=8))
    changed = sum(a.text != b.text for a, b in zip(tokens, noisy.sentences[0].tokens))
    n = len(tokens)
    assert abs(changed - n * rate) <= 5 * math.sqrt(n * rate * (1 - rate))


def test_input_not_mutated():
    corpus = generate_corpus(10, seed=4)
    snapshot = [tuple(s.words) for s in corpus]
    corrupt_corpus(corpus, NoiseConfig(rate=1.0))
    assert [tuple(s.words) for s in corpus] == snapshot


def test_alphabet_defaults_to_corpus_characters():
    corpus = generate_corpus(10, seed=4)
    alpha = set(corpus_alphabet(corpus))
    noisy, _ = corrupt_corpus(corpus, NoiseConfig(rate=1.0, ops=("substitute-char",)))
    assert set(corpus_alphabet(noisy)) <= alpha


def test_membership_file_round_trip(tmp_path):
    path = tmp_path / "ids.txt"
    write_membership(path, {"b", "a", "c"}, order=["c", "x", "a", "b"])
    assert path.read_text() == "c\na\nb\n"
    assert read_membership(path) == frozenset("abc")
    write_membership(path, set())
    assert read_membership(path) == frozenset()


@pytest.mark.parametrize(
    "kwargs",
    [dict(rate=-0.1), dict(rate=1.5), dict(ops=("shout",)), dict(ops=(), rate=0.2), dict(alphabet="a b")],
)
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        NoiseConfig(**kwargs)


def test_all_ops_listed():
    assert set(OPS) == {"swap-adjacent", "delete-char", "substitute-char", "duplicate-char"}
