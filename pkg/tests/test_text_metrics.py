import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moltext.text_metrics import (
    BLEU_EPSILON,
    bleu,
    exact_match,
    lcs_length,
    levenshtein,
    meteor,
    meteor_example,
    rouge,
    rouge_example,
    sentence_bleu,
    tokenize_text,
)


def full_matrix_levenshtein(a, b):
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        d[i][0] = i
    for j in range(len(b) + 1):
        d[0][j] = j
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[len(a)][len(b)]


def test_tokenize_text():
    assert tokenize_text("The molecule is an acid.") == ["the", "molecule", "is", "an", "acid", "."]
    assert tokenize_text("  ") == []


def test_bleu_identity():
    refs = [["the", "cat", "sat", "on", "the", "mat"], ["a", "b", "c", "d"]]
    assert bleu(refs, refs, 4) == 1.0
    assert bleu(refs, refs, 2) == 1.0


def test_bleu_brevity_fixture():
    value = bleu([["the", "cat", "sat"]], [["the", "cat"]], 2)
    assert abs(value - math.exp(-0.5)) < 1e-12
    assert abs(value - 0.6065) < 1e-4


def test_bleu_zero_overlap_is_floor():
    value = bleu([["a", "b", "c"]], [["x", "y", "z"]], 2)
    assert value <= BLEU_EPSILON * (1 + 1e-9)


def test_bleu_errors():
    with pytest.raises(ValueError):
        bleu([], [], 4)
    with pytest.raises(ValueError):
        bleu([["a"]], [], 4)


def test_bleu_matches_nltk_when_all_orders_match():
    nltk_bleu = pytest.importorskip("nltk.translate.bleu_score")
    rng = np.random.default_rng(5)
    vocab = list("abcdef")
    checked = 0
    for _ in range(300):
        refs, hyps = [], []
        for _ in range(int(rng.integers(1, 5))):
            ref = [str(w) for w in rng.choice(vocab, size=int(rng.integers(4, 12)))]
            hyp = list(ref)
            for _ in range(int(rng.integers(0, 3))):
                hyp[int(rng.integers(len(hyp)))] = str(rng.choice(vocab))
            refs.append(ref)
            hyps.append(hyp)
        expected = nltk_bleu.corpus_bleu([[r] for r in refs], hyps)
        if expected < 1e-20:
            # nltk reports ~0 when some order has no match; smoothing differs there
            continue
        assert abs(bleu(refs, hyps, 4) - expected) < 1e-9
        checked += 1
    assert checked > 100


def test_rouge_fixtures():
    assert abs(rouge_example(list("abcd"), list("acd"), "L") - 6 / 7) < 1e-12
    assert rouge_example(["a", "b"], ["c", "d"], "1") == 0.0
    same = [["the", "cat"], ["a", "b", "c"]]
    for variant in ("1", "2", "L"):
        assert rouge(same, same, variant).value == 1.0
    report = rouge([["a", "b", "c", "d"], ["x"]], [["a", "c", "d"], ["y"]], "L")
    assert abs(report.value - 3 / 7) < 1e-12
    assert report.per_example == [pytest.approx(6 / 7), 0.0]


def test_rouge_two_by_hand():
    # ref bigrams: (a,b) (b,c) (c,d); hyp bigrams: (a,b) (b,d); overlap 1
    value = rouge_example(list("abcd"), list("abd"), "2")
    p, r = 1 / 2, 1 / 3
    assert abs(value - 2 * p * r / (p + r)) < 1e-12


def test_rouge_bad_variant():
    with pytest.raises(ValueError):
        rouge_example(["a"], ["a"], "3")


def test_lcs_length():
    assert lcs_length("ABCBDAB", "BDCABA") == 4
    assert lcs_length([], ["a"]) == 0


def test_meteor_fixtures():
    assert meteor_example(["hello"], ["hello"]) == 0.5
    assert abs(meteor_example(["the", "cat", "sat"], ["the", "cat", "sat"]) - 53 / 54) < 1e-12
    assert meteor_example(["a", "b"], ["c", "d"]) == 0.0


def test_meteor_stem_stage():
    # "cats" and "cat" share the Porter stem, so the alignment is one chunk of three
    assert abs(meteor_example(["the", "cats", "sat"], ["the", "cat", "sat"]) - 53 / 54) < 1e-12


def test_meteor_fragmented():
    # four matches in four chunks: penalty 0.5 * 1**3, F = 1
    assert abs(meteor_example(list("abcd"), list("dcba")) - 0.5) < 1e-12
    # 2 of 3 hypothesis words match a 4-word reference in one chunk
    p, r = 2 / 3, 2 / 4
    f = p * r / (0.9 * p + 0.1 * r)
    assert abs(meteor_example(list("abcd"), list("abx")) - (1 - 0.5 * (1 / 2) ** 3) * f) < 1e-12


def test_meteor_corpus_mean():
    report = meteor([["hello"], ["a"]], [["hello"], ["b"]])
    assert report.value == 0.25
    assert report.per_example == [0.5, 0.0]


@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=12))
def test_self_scores_follow_formula(tokens):
    assert sentence_bleu(tokens, tokens, 4) == 1.0
    for variant in ("1", "L"):
        assert rouge_example(tokens, tokens, variant) == 1.0
    m = len(tokens)
    assert abs(meteor_example(tokens, tokens) - (1 - 0.5 * (1 / m) ** 3)) < 1e-12


@given(
    st.lists(st.sampled_from("abcd"), max_size=10),
    st.lists(st.sampled_from("abcd"), max_size=10),
)
def test_metric_ranges(ref, hyp):
    if ref or hyp:
        assert 0.0 <= sentence_bleu(ref, hyp, 4) <= 1.0
    for variant in ("1", "2", "L"):
        assert 0.0 <= rouge_example(ref, hyp, variant) <= 1.0
    if ref and hyp:
        assert 0.0 <= meteor_example(ref, hyp) <= 1.0


def test_levenshtein_examples():
    assert levenshtein("CCO", "CCO") == 0
    assert levenshtein("CCO", "CC") == 1
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("", "abc") == 3


def test_levenshtein_against_full_matrix():
    rng = np.random.default_rng(0)
    alphabet = np.array(list("CNO()=1c"))
    for _ in range(2000):
        a = "".join(rng.choice(alphabet, size=int(rng.integers(0, 41))))
        b = "".join(rng.choice(alphabet, size=int(rng.integers(0, 41))))
        assert levenshtein(a, b) == full_matrix_levenshtein(a, b)


@given(st.text("abc", max_size=12), st.text("abc", max_size=12), st.text("abc", max_size=12))
def test_levenshtein_metric_axioms(a, b, c):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)
    assert (levenshtein(a, b) == 0) == (a == b)


def test_exact_match():
    assert exact_match("CCO", "OCC")
    assert not exact_match("CCO", "CCN")
    assert not exact_match("CCO", "C1CC")
    assert not exact_match("C1CC", "C1CC")
