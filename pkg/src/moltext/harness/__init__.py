"""Evaluation orchestration: records, metrics, normalization, significance and reports."""

from moltext.harness.evaluate import (
    EvalOptions,
    MetricReport,
    eval_caption,
    eval_molgen,
    normalize_by_validity,
    select_first_valid,
)
from moltext.harness.records import ConfigError, EvalRecord, InputError, read_records
from moltext.harness.stats import SignificanceResult, betainc, significance

__all__ = [
    "ConfigError",
    "EvalOptions",
    "EvalRecord",
    "InputError",
    "MetricReport",
    "SignificanceResult",
    "betainc",
    "eval_caption",
    "eval_molgen",
    "normalize_by_validity",
    "read_records",
    "select_first_valid",
    "significance",
]
