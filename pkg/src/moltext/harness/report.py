"""Report serialization: JSON, aligned text tables and per-example TSV."""

from __future__ import annotations

import json
import math
from typing import TextIO

from moltext.harness.evaluate import MetricReport
from moltext.harness.records import InputError, unescape_field, write_tsv


def round_sig(value):
    """Round floats to 6 significant digits, recursively; non-finite floats become None."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {str(k): round_sig(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v) for v in value]
    return value


def to_json(data: dict) -> str:
    """Deterministic JSON: sorted keys, floats at 6 significant digits."""
    return json.dumps(round_sig(data), sort_keys=True, indent=2) + "\n"


def format_value(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def report_table(report: MetricReport) -> str:
    rows = [(name, format_value(value), report.populations.get(name, ""))
            for name, value in report.metrics.items()]
    width = max([len(r[0]) for r in rows] + [6])
    vwidth = max([len(r[1]) for r in rows] + [5])
    lines = [f"task: {report.task}   records: {report.n_records}   valid: {report.n_valid}"]
    lines.append(f"{'metric':<{width}}  {'value':>{vwidth}}  population")
    for name, value, pop in rows:
        lines.append(f"{name:<{width}}  {value:>{vwidth}}  {pop}")
    for name, reason in sorted(report.undefined.items()):
        lines.append(f"{name} undefined: {reason}")
    return "\n".join(lines) + "\n"


def flat_table(data: dict) -> str:
    """Two-column table for flat result dictionaries."""
    items = sorted(data.items())
    width = max([len(str(k)) for k, _ in items] + [1])
    return "".join(f"{k:<{width}}  {format_value(v)}\n" for k, v in items)


def write_per_example(report: MetricReport, fh: TextIO) -> None:
    """One row per record; ``NA`` where a metric is undefined for that record."""
    names = list(report.per_example)
    rows = []
    for i, rid in enumerate(report.ids):
        rows.append([rid] + [format_value(report.per_example[n][i]) for n in names])
    write_tsv(fh, ["id"] + names, rows)


def read_per_example(path: str, metric: str) -> dict[str, float | None]:
    """Column ``metric`` of a per-example TSV keyed by record id; ``NA`` reads as None."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputError("empty per-example file", path, 1)
    header = lines[0].split("\t")
    if header[0] != "id" or metric not in header:
        raise InputError(f"no column {metric!r}", path, 1)
    col = header.index(metric)
    out: dict[str, float | None] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise InputError(f"expected {len(header)} fields", path, lineno)
        raw = fields[col]
        try:
            out[unescape_field(fields[0])] = None if raw == "NA" else float(raw)
        except ValueError:
            raise InputError(f"bad number {raw!r}", path, lineno) from None
    return out
