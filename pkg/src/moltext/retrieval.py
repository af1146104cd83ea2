"""Rank-based retrieval evaluation: mean rank, MRR and Hits@k."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from moltext.embeddings import EmbeddingTable


@dataclass
class RankResult:
    mean_rank: float
    mrr: float
    hits: dict[int, float]
    n_queries: int
    # (query id, gold id, rank) in query order
    ranks: list[tuple[str, str, int]] = field(default_factory=list)
    n_excluded: int = 0

    def to_dict(self) -> dict:
        return {
            "mean_rank": self.mean_rank,
            "mrr": self.mrr,
            "hits": {str(k): v for k, v in sorted(self.hits.items())},
            "n_queries": self.n_queries,
            "n_excluded": self.n_excluded,
        }


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = np.sqrt((x * x).sum(axis=1))
    safe = np.where(norms > 0, norms, 1.0)
    return x / safe[:, None]


def rank_of_gold(sims: np.ndarray, ids: tuple[str, ...], gold: int) -> int:
    """1 + items scoring higher + items scoring equal with a smaller id."""
    g = sims[gold]
    greater = int(np.count_nonzero(sims > g))
    ties = sum(1 for i in np.flatnonzero(sims == g) if ids[i] < ids[gold])
    return 1 + greater + ties


def rank_retrieval(
    queries: EmbeddingTable,
    corpus: EmbeddingTable,
    gold: Mapping[str, str],
    ks: Iterable[int] = (1, 10, 100),
    skip_missing: bool = False,
) -> RankResult:
    """Rank each query's gold corpus item by cosine similarity.

    Zero vectors have similarity 0 to everything. With ``skip_missing``,
    queries whose id or gold target has no embedding are excluded and counted
    instead of raising.
    """
    if len(corpus) == 0:
        raise ValueError("retrieval corpus is empty")
    if queries.dim != corpus.dim:
        raise ValueError(f"dimension mismatch: queries {queries.dim}, corpus {corpus.dim}")
    ks = sorted(set(int(k) for k in ks))
    if any(k < 1 for k in ks):
        raise ValueError("k must be positive")
    unit_corpus = _unit_rows(corpus.vectors)
    index = {key: i for i, key in enumerate(corpus.ids)}
    ranks: list[tuple[str, str, int]] = []
    excluded = 0
    for qid, gid in gold.items():
        if qid not in queries or gid not in index:
            if skip_missing:
                excluded += 1
                continue
            missing = qid if qid not in queries else gid
            raise KeyError(f"no embedding for {missing!r}")
        q = _unit_rows(queries[qid][None, :])[0]
        sims = (unit_corpus * q).sum(axis=1)
        ranks.append((qid, gid, rank_of_gold(sims, corpus.ids, index[gid])))
    if not ranks:
        raise ValueError("no queries to evaluate")
    values = [r for _, _, r in ranks]
    n = len(values)
    return RankResult(
        mean_rank=sum(values) / n,
        mrr=sum(1.0 / r for r in values) / n,
        hits={k: sum(r <= k for r in values) / n for k in ks},
        n_queries=n,
        ranks=ranks,
        n_excluded=excluded,
    )


def read_gold(path: str) -> dict[str, str]:
    """Read ``query_id<TAB>corpus_id`` lines."""
    gold: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'query_id<TAB>corpus_id'")
            if parts[0] in gold:
                raise ValueError(f"{path}:{lineno}: duplicate query id {parts[0]!r}")
            gold[parts[0]] = parts[1]
    return gold


def write_ranks(result: RankResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_id\tgold_id\trank\n")
        for qid, gid, rank in result.ranks:
            fh.write(f"{qid}\t{gid}\t{rank}\n")
