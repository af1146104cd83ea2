"""Span-corruption pretraining examples over mixed text and SMILES data.

A fraction of each token sequence is dropped in contiguous spans. Every
dropped span is replaced in the input by the next sentinel token, and the
target lists each sentinel followed by the tokens it stands for, closed by
one more sentinel:

    tokens  a b c d e     (span {b, c})
    input   a <extra_id_0> d e
    target  <extra_id_0> b c <extra_id_1>

Randomness comes from numpy's PCG64 generator. Every example gets its own
stream, seeded with ``SeedSequence(seed, spawn_key=(epoch, batch, example))``,
so output depends only on those indices and never on processing order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

import numpy as np

from moltext.smiles import tokenize_smiles

_SENTINEL_RE = re.compile(r"<extra_id_(\d+)>")


def sentinel(i: int) -> str:
    return f"<extra_id_{i}>"


def sentinel_index(token: str) -> int | None:
    m = _SENTINEL_RE.fullmatch(token)
    return int(m.group(1)) if m else None


class StreamExhausted(RuntimeError):
    """A data stream ran out before the batch was full."""


@dataclass(frozen=True)
class CorruptionConfig:
    corruption_rate: float = 0.15
    mean_span_length: float = 3.0
    n_sentinels: int = 100
    seed: int = 0
    max_seq_len: int = 512

    def __post_init__(self) -> None:
        if not 0.0 < self.corruption_rate < 1.0:
            raise ValueError("corruption_rate must be in (0, 1)")
        if self.mean_span_length <= 0:
            raise ValueError("mean_span_length must be positive")
        if self.n_sentinels < 1:
            raise ValueError("n_sentinels must be positive")
        if self.max_seq_len < 2:
            raise ValueError("max_seq_len must be at least 2")


@dataclass(frozen=True)
class CorruptionExample:
    input_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    source_modality: str


def example_rng(seed: int, epoch: int = 0, batch: int = 0, example: int = 0) -> np.random.Generator:
    """Independent generator for one example."""
    seq = np.random.SeedSequence(seed, spawn_key=(epoch, batch, example))
    return np.random.Generator(np.random.PCG64(seq))


def span_plan(length: int, config: CorruptionConfig, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Choose non-adjacent (start, length) spans to drop from a sequence.

    round(rate * length) tokens are dropped (always leaving one token) in
    round(noise / mean_span_length) spans, at least one. Span lengths are a
    uniformly random composition of the noise count; spans go into distinct
    gaps between kept tokens, so two spans never touch.
    """
    n_noise = min(int(round(config.corruption_rate * length)), length - 1)
    if n_noise <= 0:
        return []
    n_keep = length - n_noise
    n_spans = max(1, int(round(n_noise / config.mean_span_length)))
    n_spans = min(n_spans, n_noise, n_keep + 1)
    cuts = np.sort(rng.choice(np.arange(1, n_noise), size=n_spans - 1, replace=False)) if n_spans > 1 else []
    bounds = [0, *(int(c) for c in cuts), n_noise]
    span_lengths = [b - a for a, b in zip(bounds, bounds[1:])]
    gaps = sorted(int(g) for g in rng.choice(n_keep + 1, size=n_spans, replace=False))
    spans = []
    offset = 0  # noise tokens placed before the current gap
    for gap, size in zip(gaps, span_lengths):
        spans.append((gap + offset, size))
        offset += size
    return spans


def corrupt(
    tokens: Iterable[str], config: CorruptionConfig, rng: np.random.Generator, modality: str = "text"
) -> CorruptionExample:
    """Replace random spans of ``tokens`` by sentinels."""
    tokens = list(tokens)
    if len(tokens) < 2:
        raise ValueError("sequence must have at least 2 tokens")
    if len(tokens) > config.max_seq_len:
        raise ValueError(f"sequence longer than max_seq_len={config.max_seq_len}")
    for tok in tokens:
        if sentinel_index(tok) is not None:
            raise ValueError(f"input already contains sentinel token {tok!r}")
    spans = span_plan(len(tokens), config, rng)
    if len(spans) + 1 > config.n_sentinels:
        raise ValueError(f"{len(spans) + 1} sentinels needed but only {config.n_sentinels} available")
    inputs: list[str] = []
    targets: list[str] = []
    pos = 0
    for i, (start, size) in enumerate(spans):
        inputs.extend(tokens[pos:start])
        inputs.append(sentinel(i))
        targets.append(sentinel(i))
        targets.extend(tokens[start:start + size])
        pos = start + size
    inputs.extend(tokens[pos:])
    targets.append(sentinel(len(spans)))
    return CorruptionExample(tuple(inputs), tuple(targets), modality)


def decorrupt(example: CorruptionExample) -> list[str]:
    """Splice the target spans back into the input; inverse of :func:`corrupt`."""
    target = list(example.target_tokens)
    if not target or sentinel_index(target[0]) != 0:
        raise ValueError("target must start with sentinel 0")
    spans: list[list[str]] = []
    expected = 0
    for tok in target:
        idx = sentinel_index(tok)
        if idx is None:
            spans[-1].append(tok)
            continue
        if idx != expected:
            raise ValueError(f"target sentinel {idx} out of order, expected {expected}")
        spans.append([])
        expected += 1
    if spans[-1]:
        raise ValueError("target is missing its terminal sentinel")
    spans.pop()
    out: list[str] = []
    expected = 0
    for tok in example.input_tokens:
        idx = sentinel_index(tok)
        if idx is None:
            out.append(tok)
            continue
        if idx != expected or idx >= len(spans):
            raise ValueError(f"input sentinel {idx} does not match the target")
        out.extend(spans[idx])
        expected += 1
    if expected != len(spans):
        raise ValueError(f"input has {expected} sentinels but target has {len(spans)} spans")
    return out


def _next_sequence(stream: Iterator[str], modality: str, max_len: int) -> list[str]:
    for line in stream:
        if modality == "text":
            tokens = line.split()
        else:
            fields = line.split()
            tokens = tokenize_smiles(fields[0]) if fields else []
        tokens = tokens[:max_len]
        if len(tokens) >= 2:
            return tokens
    raise StreamExhausted(f"{modality} stream exhausted")


def mixed_batch(
    text_stream: Iterator[str],
    smiles_stream: Iterator[str],
    batch_size: int,
    config: CorruptionConfig,
    batch_index: int = 0,
    epoch: int = 0,
) -> list[CorruptionExample]:
    """Build one batch alternating text and SMILES examples, half of each.

    Text lines are split on whitespace; SMILES lines contribute their first
    whitespace-separated field, split with :func:`tokenize_smiles`. Lines that
    give fewer than two tokens are skipped; longer sequences are truncated to
    ``max_seq_len``.
    """
    if batch_size <= 0 or batch_size % 2:
        raise ValueError("batch_size must be a positive even number")
    out = []
    for i in range(batch_size):
        modality = "text" if i % 2 == 0 else "smiles"
        stream = text_stream if modality == "text" else smiles_stream
        tokens = _next_sequence(stream, modality, config.max_seq_len)
        rng = example_rng(config.seed, epoch, batch_index, i)
        out.append(corrupt(tokens, config, rng, modality))
    return out


def iter_batches(
    text_stream: Iterator[str],
    smiles_stream: Iterator[str],
    batch_size: int,
    config: CorruptionConfig,
    num_batches: int | None = None,
    epoch: int = 0,
) -> Iterator[list[CorruptionExample]]:
    """Yield full batches until ``num_batches`` or until a stream runs dry."""
    b = 0
    while num_batches is None or b < num_batches:
        try:
            batch = mixed_batch(text_stream, smiles_stream, batch_size, config, b, epoch)
        except StreamExhausted:
            if num_batches is not None:
                raise
            return
        yield batch
        b += 1


def write_examples(examples: Iterable[CorruptionExample], fh: TextIO) -> int:
    """Write TSV rows ``modality, input, target`` (tokens space-joined); returns row count."""
    n = 0
    for ex in examples:
        fh.write(f"{ex.source_modality}\t{' '.join(ex.input_tokens)}\t{' '.join(ex.target_tokens)}\n")
        n += 1
    return n
