"""String metrics for captions and SMILES: BLEU, ROUGE, METEOR, Levenshtein, exact match.

All corpus metrics take parallel lists of token lists, references first.
Use :func:`tokenize_text` for captions and
:func:`moltext.smiles.tokenize_smiles` for molecule strings.
"""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from nltk.stem.porter import PorterStemmer

from moltext.smiles import ParseError, canonical_smiles

Tokens = Sequence[str]

BLEU_EPSILON = 1e-9
METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5

_WORD_RE = re.compile(r"\w+|[^\w\s]")
_stemmer = PorterStemmer()


@dataclass
class ScoreReport:
    metric: str
    value: float
    per_example: list[float] = field(default_factory=list)


def tokenize_text(text: str) -> list[str]:
    """Lowercase and split into word and punctuation tokens.

    >>> tokenize_text("The molecule is an acid.")
    ['the', 'molecule', 'is', 'an', 'acid', '.']
    """
    return _WORD_RE.findall(text.lower())


def _check_corpus(refs: Sequence, hyps: Sequence) -> None:
    if len(refs) != len(hyps):
        raise ValueError(f"{len(refs)} references but {len(hyps)} hypotheses")
    if not refs:
        raise ValueError("empty corpus")


def _ngrams(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(refs: Sequence[Tokens], hyps: Sequence[Tokens], max_n: int = 4) -> float:
    """Corpus BLEU with one reference per hypothesis and uniform weights.

    Clipped n-gram counts are pooled over the corpus. An order with no
    matches gets precision ``BLEU_EPSILON``; an order for which neither side
    has any n-grams is left out of the geometric mean.
    """
    _check_corpus(refs, hyps)
    if max_n < 1:
        raise ValueError("max_n must be positive")
    logs = []
    for n in range(1, max_n + 1):
        matches = total = ref_total = 0
        for ref, hyp in zip(refs, hyps):
            h, r = _ngrams(hyp, n), _ngrams(ref, n)
            matches += sum(min(c, r[g]) for g, c in h.items())
            total += sum(h.values())
            ref_total += sum(r.values())
        if total == 0 and ref_total == 0:
            continue
        logs.append(math.log(matches / total if matches else BLEU_EPSILON))
    hyp_len = sum(len(h) for h in hyps)
    ref_len = sum(len(r) for r in refs)
    if hyp_len == 0:
        return 1.0 if ref_len == 0 else 0.0
    penalty = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / hyp_len)
    return penalty * math.exp(math.fsum(logs) / len(logs))


def sentence_bleu(ref: Tokens, hyp: Tokens, max_n: int = 4) -> float:
    return bleu([ref], [hyp], max_n)


def _f1(overlap: int, n_hyp: int, n_ref: int) -> float:
    if overlap == 0:
        return 0.0
    p, r = overlap / n_hyp, overlap / n_ref
    return 2 * p * r / (p + r)


def lcs_length(a: Tokens, b: Tokens) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_example(ref: Tokens, hyp: Tokens, variant: str) -> float:
    """Per-example ROUGE F1; ``variant`` is "1", "2" or "L".

    Two sequences with nothing to count (no n-grams of the order) score 1
    when they are equal and 0 otherwise.
    """
    variant = str(variant)
    if variant == "L":
        if not ref or not hyp:
            return float(list(ref) == list(hyp))
        return _f1(lcs_length(ref, hyp), len(hyp), len(ref))
    if variant not in ("1", "2"):
        raise ValueError(f"unknown ROUGE variant {variant!r}")
    n = int(variant)
    h, r = _ngrams(hyp, n), _ngrams(ref, n)
    if not h or not r:
        return float(not h and not r and list(ref) == list(hyp))
    overlap = sum(min(c, r[g]) for g, c in h.items())
    return _f1(overlap, sum(h.values()), sum(r.values()))


def rouge(refs: Sequence[Tokens], hyps: Sequence[Tokens], variant: str = "L") -> ScoreReport:
    """Mean per-example ROUGE F1."""
    _check_corpus(refs, hyps)
    scores = [rouge_example(r, h, variant) for r, h in zip(refs, hyps)]
    return ScoreReport(f"rouge{variant}", sum(scores) / len(scores), scores)


@lru_cache(maxsize=65536)
def _stem(word: str) -> str:
    return _stemmer.stem(word)


def _align(ref: list[str], hyp: list[str], used_r: set[int], used_h: set[int], key) -> list[tuple[int, int]]:
    """Pair the k-th unmatched hypothesis occurrence of each form with the k-th reference one."""
    ref_slots = defaultdict(list)
    for j, w in enumerate(ref):
        if j not in used_r:
            ref_slots[key(w)].append(j)
    taken: dict[str, int] = defaultdict(int)
    pairs = []
    for i, w in enumerate(hyp):
        if i in used_h:
            continue
        k = key(w)
        slots = ref_slots.get(k)
        if slots and taken[k] < len(slots):
            pairs.append((i, slots[taken[k]]))
            taken[k] += 1
    for i, j in pairs:
        used_h.add(i)
        used_r.add(j)
    return pairs


def meteor_example(ref: Tokens, hyp: Tokens) -> float:
    """Sentence METEOR with exact and Porter-stem matching.

    score = (1 - penalty) * F, where F = P*R / (alpha*P + (1-alpha)*R) and
    penalty = gamma * (chunks / matches) ** beta.
    """
    ref, hyp = list(ref), list(hyp)
    used_r: set[int] = set()
    used_h: set[int] = set()
    pairs = _align(ref, hyp, used_r, used_h, key=lambda w: w)
    pairs += _align(ref, hyp, used_r, used_h, key=_stem)
    m = len(pairs)
    if m == 0:
        return 0.0
    pairs.sort()
    chunks = 1
    for (h0, r0), (h1, r1) in zip(pairs, pairs[1:]):
        if h1 != h0 + 1 or r1 != r0 + 1:
            chunks += 1
    precision, recall = m / len(hyp), m / len(ref)
    fmean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    penalty = METEOR_GAMMA * (chunks / m) ** METEOR_BETA
    return (1 - penalty) * fmean


def meteor(refs: Sequence[Tokens], hyps: Sequence[Tokens]) -> ScoreReport:
    """Mean of sentence-level METEOR."""
    _check_corpus(refs, hyps)
    scores = [meteor_example(r, h) for r, h in zip(refs, hyps)]
    return ScoreReport("meteor", sum(scores) / len(scores), scores)


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions and substitutions."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def exact_match(gt_smiles: str, pred_smiles: str) -> bool:
    """True iff both strings parse and have the same canonical form."""
    try:
        return canonical_smiles(gt_smiles) == canonical_smiles(pred_smiles)
    except ParseError:
        return False
