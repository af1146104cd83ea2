"""Embedding tables and embedding-space metrics (Text2Mol cosine, Frechet distance)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# Negative eigenvalues smaller than this fraction of the largest are rounding noise.
PSD_TOLERANCE = 1e-6


class EmbeddingFormatError(ValueError):
    """Malformed embedding file; ``line`` is 1-based."""

    def __init__(self, path: str, line: int, message: str) -> None:
        self.path, self.line = path, line
        super().__init__(f"{path}:{line}: {message}")


@dataclass(frozen=True)
class EmbeddingTable:
    """Vectors of one dimension keyed by record id."""

    dim: int
    ids: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.vectors.shape != (len(self.ids), self.dim):
            raise ValueError(f"vectors have shape {self.vectors.shape}, expected ({len(self.ids)}, {self.dim})")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("duplicate embedding ids")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding components must be finite")
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(self.ids)})

    @classmethod
    def from_mapping(cls, entries: dict[str, Sequence[float]], dim: int | None = None) -> EmbeddingTable:
        ids = tuple(entries)
        if dim is None:
            if not ids:
                raise ValueError("dim is required for an empty table")
            dim = len(next(iter(entries.values())))
        vectors = np.array([list(entries[k]) for k in ids], dtype=float).reshape(len(ids), dim)
        return cls(dim, ids, vectors)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, key: str) -> bool:
        return key in self._index

    def __getitem__(self, key: str) -> np.ndarray:
        return self.vectors[self._index[key]]

    def get(self, key: str) -> np.ndarray | None:
        i = self._index.get(key)
        return None if i is None else self.vectors[i]


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read ``#dim D`` followed by ``id<TAB>v1 v2 ... vD`` lines."""
    name = str(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("#dim"):
        raise EmbeddingFormatError(name, 1, "expected header '#dim D'")
    try:
        dim = int(lines[0][4:].strip())
    except ValueError:
        raise EmbeddingFormatError(name, 1, f"bad dimension in {lines[0]!r}") from None
    if dim <= 0:
        raise EmbeddingFormatError(name, 1, "dimension must be positive")
    ids: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, tab, rest = line.partition("\t")
        if not tab or not key:
            raise EmbeddingFormatError(name, lineno, "expected 'id<TAB>values'")
        if key in seen:
            raise EmbeddingFormatError(name, lineno, f"duplicate id {key!r}")
        try:
            values = [float(v) for v in rest.split()]
        except ValueError:
            raise EmbeddingFormatError(name, lineno, "non-numeric component") from None
        if len(values) != dim:
            raise EmbeddingFormatError(name, lineno, f"expected {dim} components, found {len(values)}")
        if not all(math.isfinite(v) for v in values):
            raise EmbeddingFormatError(name, lineno, "non-finite component")
        seen.add(key)
        ids.append(key)
        rows.append(values)
    vectors = np.array(rows, dtype=float).reshape(len(rows), dim)
    return EmbeddingTable(dim, tuple(ids), vectors)


def write_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#dim {table.dim}\n")
        for key, vec in zip(table.ids, table.vectors):
            fh.write(key + "\t" + " ".join(repr(float(v)) for v in vec) + "\n")


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; raises ValueError for zero vectors or mismatched lengths."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


@dataclass
class Text2MolResult:
    """Mean cosine over usable pairs; ``per_pair`` holds None for excluded pairs."""

    mean: float | None
    n_pairs: int
    n_excluded: int
    per_pair: list[float | None]


def text2mol_score(pairs: Iterable[tuple[np.ndarray, np.ndarray]]) -> Text2MolResult:
    """Mean cosine similarity of embedding pairs, skipping pairs with a zero vector."""
    per_pair: list[float | None] = []
    for a, b in pairs:
        try:
            per_pair.append(cosine(a, b))
        except ValueError as exc:
            if "zero vector" not in str(exc):
                raise
            per_pair.append(None)
    used = [s for s in per_pair if s is not None]
    mean = math.fsum(used) / len(used) if used else None
    return Text2MolResult(mean, len(used), len(per_pair) - len(used), per_pair)


@dataclass(frozen=True)
class GaussianSummary:
    mean: np.ndarray
    covariance: np.ndarray
    sample_count: int

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


def fit_gaussian(samples: EmbeddingTable | np.ndarray) -> GaussianSummary:
    """Sample mean and unbiased (n - 1) covariance."""
    x = samples.vectors if isinstance(samples, EmbeddingTable) else np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise ValueError("need at least two samples to fit a Gaussian")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    mean = x.mean(axis=0)
    centred = x - mean
    cov = centred.T @ centred / (n - 1)
    cov = (cov + cov.T) / 2
    return GaussianSummary(mean, cov, n)


def _clamped_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = (m + m.T) / 2
    w, v = np.linalg.eigh(m)
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny) if w.size else 1.0
    if w.size and w.min() < -PSD_TOLERANCE * scale:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3g})")
    # below the numerical-rank threshold an eigenvalue is indistinguishable from 0,
    # and its square root would add ~1e-8 of noise per null direction
    w = np.where(w > w.size * np.finfo(float).eps * scale, w, 0.0)
    return w, v


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a symmetric positive semidefinite matrix."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix must be finite")
    w, v = _clamped_eigh(m)
    return (v * np.sqrt(w)) @ v.T


def frechet_distance(a: GaussianSummary, b: GaussianSummary) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

    The trace of (S_a S_b)^(1/2) is taken from the eigenvalues of the
    symmetric matrix S_a^(1/2) S_b S_a^(1/2), which has the same spectrum.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    for s in (a, b):
        if not (np.all(np.isfinite(s.mean)) and np.all(np.isfinite(s.covariance))):
            raise ValueError("Gaussian summary must be finite")
    root_a = sqrtm_psd(a.covariance)
    w, _ = _clamped_eigh(root_a @ b.covariance @ root_a)
    diff = a.mean - b.mean
    value = (
        float(diff @ diff)
        + float(np.trace(a.covariance))
        + float(np.trace(b.covariance))
        - 2.0 * float(np.sum(np.sqrt(w)))
    )
    return max(value, 0.0)
