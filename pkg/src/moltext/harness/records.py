"""Prediction-file I/O.

Files are UTF-8 TSV with a header row. Inside fields, ``\\t``, ``\\n``,
``\\r`` and ``\\\\`` stand for tab, newline, carriage return and backslash.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

RECORD_COLUMNS = ("id", "input", "ground_truth", "prediction")
_UNESCAPE = {"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}


class InputError(ValueError):
    """Malformed input data; ``line`` is 1-based when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None) -> None:
        self.path, self.line = path, line
        where = ":".join(str(x) for x in (path, line) if x is not None)
        super().__init__(f"{where}: {message}" if where else message)


class ConfigError(ValueError):
    """Inconsistent options, such as a metric requested without its embeddings."""


@dataclass(frozen=True)
class EvalRecord:
    id: str
    input: str
    ground_truth: str
    prediction: str


@dataclass(frozen=True)
class CandidateRecord:
    id: str
    input: str
    ground_truth: str
    candidates: tuple[str, ...]


def unescape_field(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text) and text[i + 1] in _UNESCAPE:
            out.append(_UNESCAPE[text[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def escape_field(text: str) -> str:
    return (
        text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")
    )


def _read_rows(path: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise InputError(f"not valid UTF-8 ({exc.reason})", path) from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise InputError("empty file, expected a header row", path, 1)
    header = lines[0].rstrip("\r").split("\t")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        fields = [unescape_field(f) for f in line.split("\t")]
        if len(fields) != len(header):
            raise InputError(f"expected {len(header)} fields, found {len(fields)}", path, lineno)
        rows.append((lineno, fields))
    return header, rows


def read_records(path: str) -> list[EvalRecord]:
    """Read an ``id, input, ground_truth, prediction`` file."""
    header, rows = _read_rows(path)
    if tuple(header) != RECORD_COLUMNS:
        raise InputError(f"header must be {'<TAB>'.join(RECORD_COLUMNS)}", path, 1)
    records = []
    seen: set[str] = set()
    for lineno, fields in rows:
        if fields[0] in seen:
            raise InputError(f"duplicate id {fields[0]!r}", path, lineno)
        seen.add(fields[0])
        records.append(EvalRecord(*fields))
    return records


def read_candidates(path: str) -> list[CandidateRecord]:
    """Read an ``id, input, ground_truth, pred_1 .. pred_k`` beam file."""
    header, rows = _read_rows(path)
    k = len(header) - 3
    expected = ["id", "input", "ground_truth"] + [f"pred_{i}" for i in range(1, k + 1)]
    if k < 1 or header != expected:
        raise InputError("header must be id, input, ground_truth, pred_1 .. pred_k", path, 1)
    out = []
    seen: set[str] = set()
    for lineno, fields in rows:
        if fields[0] in seen:
            raise InputError(f"duplicate id {fields[0]!r}", path, lineno)
        seen.add(fields[0])
        out.append(CandidateRecord(fields[0], fields[1], fields[2], tuple(fields[3:])))
    return out


def write_tsv(fh: TextIO, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    fh.write("\t".join(header) + "\n")
    for row in rows:
        fh.write("\t".join(escape_field(str(x)) for x in row) + "\n")


def write_records(fh: TextIO, records: Iterable[EvalRecord]) -> None:
    write_tsv(fh, RECORD_COLUMNS, ((r.id, r.input, r.ground_truth, r.prediction) for r in records))
