"""Corpus evaluation for molecule generation and captioning."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from moltext import text_metrics as tm
from moltext.embeddings import EmbeddingTable, fit_gaussian, frechet_distance, text2mol_score
from moltext.fingerprints import maccs_fp, morgan_fp, path_fp, tanimoto
from moltext.harness.records import CandidateRecord, ConfigError, EvalRecord, InputError
from moltext.smiles import ParseError, canonicalize, is_valid, parse, tokenize_smiles

MOLGEN_METRICS = (
    "bleu", "exact", "levenshtein", "maccs_fts", "rdk_fts", "morgan_fts", "fcd", "text2mol", "validity",
)
CAPTION_METRICS = ("bleu2", "bleu4", "rouge1", "rouge2", "rougeL", "meteor", "text2mol")
FTS_METRICS = ("maccs_fts", "rdk_fts", "morgan_fts")
# metrics computed on valid predictions only, and whether higher is better
VALID_ONLY = {"maccs_fts": True, "rdk_fts": True, "morgan_fts": True, "text2mol": True, "fcd": False}

POP_ALL = "all"
POP_VALID = "valid-only"
POP_TIMES_VALIDITY = "valid-only*validity"
POP_DIV_VALIDITY = "valid-only/validity"

# embedding roles: FCD compares gt and pred molecules; Text2Mol pairs input and prediction
ROLES = ("gt", "pred", "t2m-input", "t2m-pred")


@dataclass
class EvalOptions:
    metrics: tuple[str, ...] | None = None
    embeddings: dict[str, EmbeddingTable] = field(default_factory=dict)
    morgan_radius: int = 2
    path_length: int = 7
    fp_bits: int = 2048
    strip_names: bool = False
    jobs: int = 1

    def config(self, task: str, metrics: Sequence[str]) -> dict:
        return {
            "task": task,
            "metrics": sorted(metrics),
            "embedding_roles": sorted(self.embeddings),
            "morgan_radius": self.morgan_radius,
            "path_length": self.path_length,
            "fp_bits": self.fp_bits,
            "strip_names": self.strip_names,
        }


@dataclass
class MetricReport:
    task: str
    metrics: dict[str, float | None]
    n_records: int
    n_valid: int
    populations: dict[str, str] = field(default_factory=dict)
    undefined: dict[str, str] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    config_hash: str = ""
    per_example: dict[str, list[float | None]] = field(default_factory=dict)
    ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "metrics": dict(self.metrics),
            "n_records": self.n_records,
            "n_valid": self.n_valid,
            "populations": dict(self.populations),
            "undefined": dict(self.undefined),
            "counts": dict(self.counts),
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> MetricReport:
        try:
            return cls(
                task=data["task"],
                metrics=dict(data["metrics"]),
                n_records=int(data["n_records"]),
                n_valid=int(data["n_valid"]),
                populations=dict(data.get("populations", {})),
                undefined=dict(data.get("undefined", {})),
                counts=dict(data.get("counts", {})),
                config_hash=data.get("config_hash", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"not a metric report: {exc}") from None


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()


def _select(requested: tuple[str, ...] | None, known: Sequence[str], options: EvalOptions) -> list[str]:
    if requested is None:
        chosen = [m for m in known if m not in ("fcd", "text2mol")]
        if "fcd" in known and {"gt", "pred"} <= options.embeddings.keys():
            chosen.append("fcd")
        if {"t2m-input", "t2m-pred"} <= options.embeddings.keys():
            chosen.append("text2mol")
        return [m for m in known if m in chosen]
    unknown = [m for m in requested if m not in known]
    if unknown:
        raise ConfigError(f"unknown metric(s) {', '.join(unknown)}; choose from {', '.join(known)}")
    if "fcd" in requested and not {"gt", "pred"} <= options.embeddings.keys():
        raise ConfigError("fcd needs --embeddings gt:FILE and pred:FILE")
    if "text2mol" in requested and not {"t2m-input", "t2m-pred"} <= options.embeddings.keys():
        raise ConfigError("text2mol needs --embeddings t2m-input:FILE and t2m-pred:FILE")
    return [m for m in known if m in requested]


def _lookup(options: EvalOptions, role: str, key: str) -> object:
    vec = options.embeddings[role].get(key)
    if vec is None:
        raise InputError(f"no {role} embedding for record {key!r}")
    return vec


def _molgen_record(args: tuple[str, str, int, int, int, tuple[str, ...]]) -> dict:
    """Per-record molecule metrics; top level so it can run in worker processes."""
    gt_text, pred_text, radius, path_len, bits, wanted = args
    same = gt_text == pred_text
    try:
        pred = parse(pred_text)
    except ParseError:
        pred = None
    try:
        gt = pred if same else parse(gt_text)
    except ParseError:
        gt = None
    if gt is None or pred is None:
        exact = False
    else:
        exact = same or canonicalize(gt) == canonicalize(pred)
    out: dict = {
        "exact": float(exact),
        "levenshtein": float(tm.levenshtein(gt_text, pred_text)),
        "bleu": tm.sentence_bleu(tokenize_smiles(gt_text), tokenize_smiles(pred_text), 4),
        "validity": float(pred is not None),
        "gt_valid": gt is not None,
    }
    for name, fp in (
        ("maccs_fts", maccs_fp),
        ("rdk_fts", lambda m: path_fp(m, path_len, bits)),
        ("morgan_fts", lambda m: morgan_fp(m, radius, bits)),
    ):
        if name in wanted and pred is not None and gt is not None:
            fp_pred = fp(pred)
            fp_gt = fp_pred if same else fp(gt)
            # two empty fingerprints carry no similarity information
            out[name] = None if fp_gt.bits == 0 == fp_pred.bits else tanimoto(fp_gt, fp_pred)
        else:
            out[name] = None
    return out


def _map(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def eval_molgen(records: Sequence[EvalRecord], options: EvalOptions | None = None) -> MetricReport:
    """Molecule generation metrics.

    BLEU (SMILES tokens), exact match and Levenshtein use every record.
    Fingerprint similarities, FCD and Text2Mol use only records whose
    prediction (and ground truth) parse; validity is the parse rate. A pair
    whose two fingerprints are both empty (e.g. H2 under MACCS) is left out
    of that family's mean and counted in ``counts["<metric>_empty_pairs"]``.
    """
    options = options or EvalOptions()
    if not records:
        raise InputError("no records to evaluate")
    wanted = _select(options.metrics, MOLGEN_METRICS, options)
    n = len(records)
    per = _map(
        _molgen_record,
        [(r.ground_truth, r.prediction, options.morgan_radius, options.path_length, options.fp_bits, tuple(wanted))
         for r in records],
        options.jobs,
    )
    valid = [i for i, p in enumerate(per) if p["validity"]]
    pairs = [i for i in valid if per[i]["gt_valid"]]
    metrics: dict[str, float | None] = {}
    populations: dict[str, str] = {}
    undefined: dict[str, str] = {}
    per_example: dict[str, list] = {}
    counts = {"valid_pairs": len(pairs), "invalid_ground_truth": sum(not p["gt_valid"] for p in per)}

    if "bleu" in wanted:
        metrics["bleu"] = tm.bleu(
            [tokenize_smiles(r.ground_truth) for r in records],
            [tokenize_smiles(r.prediction) for r in records],
            4,
        )
    for name in ("exact", "levenshtein", "validity"):
        if name in wanted:
            metrics[name] = math.fsum(p[name] for p in per) / n
    for name in ("bleu", "exact", "levenshtein", "validity"):
        if name in wanted:
            populations[name] = POP_ALL
            per_example[name] = [p[name] for p in per]

    for name in FTS_METRICS:
        if name not in wanted:
            continue
        populations[name] = POP_VALID
        per_example[name] = [p[name] for p in per]
        scored = [per[i][name] for i in pairs if per[i][name] is not None]
        counts[f"{name}_empty_pairs"] = len(pairs) - len(scored)
        if scored:
            metrics[name] = math.fsum(scored) / len(scored)
        else:
            metrics[name] = None
            undefined[name] = "no valid predictions" if not pairs else "all fingerprint pairs empty"

    if "fcd" in wanted:
        populations["fcd"] = POP_VALID
        if len(valid) < 2:
            metrics["fcd"] = None
            undefined["fcd"] = "fewer than two valid predictions"
        else:
            gt_vecs = [_lookup(options, "gt", records[i].id) for i in valid]
            pred_vecs = [_lookup(options, "pred", records[i].id) for i in valid]
            metrics["fcd"] = frechet_distance(fit_gaussian(np.vstack(gt_vecs)), fit_gaussian(np.vstack(pred_vecs)))

    if "text2mol" in wanted:
        _text2mol(records, valid, options, metrics, populations, undefined, per_example, counts, POP_VALID)

    return MetricReport(
        task="molgen",
        metrics=metrics,
        n_records=n,
        n_valid=len(valid),
        populations=populations,
        undefined=undefined,
        counts=counts,
        config_hash=config_hash(options.config("molgen", wanted)),
        per_example=per_example,
        ids=[r.id for r in records],
    )


def _text2mol(records, usable, options, metrics, populations, undefined, per_example, counts, population):
    populations["text2mol"] = population
    column: list = [None] * len(records)
    pairs = [
        (_lookup(options, "t2m-input", records[i].id), _lookup(options, "t2m-pred", records[i].id))
        for i in usable
    ]
    result = text2mol_score(pairs)
    for i, score in zip(usable, result.per_pair):
        column[i] = score
    per_example["text2mol"] = column
    counts["text2mol_excluded"] = result.n_excluded
    metrics["text2mol"] = result.mean
    if result.mean is None:
        undefined["text2mol"] = "no usable embedding pairs"


def strip_name(caption: str) -> str:
    """Replace a leading molecule name ("X is ...") with "The molecule is ..."."""
    head, sep, rest = caption.partition(" is ")
    if not sep or not head.strip():
        return caption
    return "The molecule is " + rest


def eval_caption(records: Sequence[EvalRecord], options: EvalOptions | None = None) -> MetricReport:
    """Captioning metrics over word tokens: BLEU-2/4, ROUGE-1/2/L F1, METEOR, optional Text2Mol."""
    options = options or EvalOptions()
    if not records:
        raise InputError("no records to evaluate")
    wanted = _select(options.metrics, CAPTION_METRICS, options)
    truths = [strip_name(r.ground_truth) if options.strip_names else r.ground_truth for r in records]
    refs = [tm.tokenize_text(t) for t in truths]
    hyps = [tm.tokenize_text(r.prediction) for r in records]
    metrics: dict[str, float | None] = {}
    per_example: dict[str, list] = {}
    populations: dict[str, str] = {}
    for name, n in (("bleu2", 2), ("bleu4", 4)):
        if name in wanted:
            metrics[name] = tm.bleu(refs, hyps, n)
            per_example[name] = [tm.sentence_bleu(r, h, n) for r, h in zip(refs, hyps)]
    for variant in ("1", "2", "L"):
        name = f"rouge{variant}"
        if name in wanted:
            report = tm.rouge(refs, hyps, variant)
            metrics[name], per_example[name] = report.value, report.per_example
    if "meteor" in wanted:
        report = tm.meteor(refs, hyps)
        metrics["meteor"], per_example["meteor"] = report.value, report.per_example
    for name in metrics:
        populations[name] = POP_ALL
    undefined: dict[str, str] = {}
    counts: dict[str, int] = {}
    if "text2mol" in wanted:
        _text2mol(records, list(range(len(records))), options, metrics, populations, undefined,
                  per_example, counts, POP_ALL)
    return MetricReport(
        task="caption",
        metrics=metrics,
        n_records=len(records),
        n_valid=len(records),
        populations=populations,
        undefined=undefined,
        counts=counts,
        config_hash=config_hash(options.config("caption", wanted)),
        per_example=per_example,
        ids=[r.id for r in records],
    )


def normalize_by_validity(report: MetricReport) -> MetricReport:
    """Rescale valid-only metrics to the whole record set.

    Higher-is-better metrics are multiplied by validity and FCD is divided
    by it. A report whose metrics were already rescaled is rejected.
    """
    validity = report.metrics.get("validity")
    if validity is None:
        raise InputError("report has no validity to normalize by")
    if any(p in (POP_TIMES_VALIDITY, POP_DIV_VALIDITY) for p in report.populations.values()):
        raise InputError("report is already normalized by validity")
    metrics = dict(report.metrics)
    populations = dict(report.populations)
    for name, higher_better in VALID_ONLY.items():
        if populations.get(name) != POP_VALID:
            continue
        value = metrics.get(name)
        if higher_better:
            populations[name] = POP_TIMES_VALIDITY
            if value is not None:
                metrics[name] = value * validity
        else:
            if validity == 0:
                raise InputError(f"cannot divide {name} by zero validity")
            populations[name] = POP_DIV_VALIDITY
            if value is not None:
                metrics[name] = value / validity
    return MetricReport(
        task=report.task,
        metrics=metrics,
        n_records=report.n_records,
        n_valid=report.n_valid,
        populations=populations,
        undefined=dict(report.undefined),
        counts=dict(report.counts),
        config_hash=report.config_hash,
    )


@dataclass(frozen=True)
class Selection:
    id: str
    smiles: str
    valid: bool
    beam: int | None  # 1-based index of the chosen candidate


def select_first_valid(candidates: Sequence[str], record_id: str = "") -> Selection:
    """First candidate (in beam order) that parses; flagged invalid when none does."""
    if not candidates:
        raise InputError(f"record {record_id!r} has no candidates")
    for i, smiles in enumerate(candidates, start=1):
        if is_valid(smiles):
            return Selection(record_id, smiles, True, i)
    return Selection(record_id, "", False, None)


def select_records(records: Sequence[CandidateRecord]) -> tuple[list[EvalRecord], list[Selection]]:
    selections = [select_first_valid(r.candidates, r.id) for r in records]
    chosen = [EvalRecord(r.id, r.input, r.ground_truth, s.smiles) for r, s in zip(records, selections)]
    return chosen, selections
