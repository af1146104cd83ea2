"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from moltext import __version__
from moltext.corruption import CorruptionConfig, iter_batches, write_examples
from moltext.embeddings import EmbeddingFormatError, load_embeddings
from moltext.fingerprints import FAMILIES, fingerprint
from moltext.harness.evaluate import (
    ROLES,
    EvalOptions,
    MetricReport,
    eval_caption,
    eval_molgen,
    normalize_by_validity,
    select_records,
)
from moltext.harness.records import ConfigError, InputError, read_candidates, read_records, write_records
from moltext.harness.report import flat_table, read_per_example, report_table, to_json, write_per_example
from moltext.harness.stats import significance
from moltext.retrieval import rank_retrieval, read_gold, write_ranks
from moltext.smiles import ParseError, canonicalize, parse

EXIT_OK, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="random seed (default 0)")
    parser.add_argument("--jobs", type=int, default=default(1), help="worker processes (default 1)")
    parser.add_argument("--format", choices=("json", "table"), default=default("json"))
    parser.add_argument(
        "--embeddings",
        action="append",
        default=default([]),
        metavar="ROLE:FILE",
        help=f"embedding table tagged with a role ({', '.join(ROLES)}); repeatable",
    )
    parser.add_argument("-o", "--output", default=default(None), help="write the result here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moltext", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser, suppress=False)
    shared = argparse.ArgumentParser(add_help=False)
    _common(shared, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("eval-molgen", "score generated molecules"), ("eval-caption", "score generated captions")):
        p = sub.add_parser(name, parents=[shared], help=helptext)
        p.add_argument("records", help="TSV with id, input, ground_truth, prediction")
        p.add_argument("--metrics", help="comma-separated subset of metrics")
        p.add_argument("--per-example", metavar="FILE", help="also write per-record scores as TSV")
        if name == "eval-molgen":
            p.add_argument("--radius", type=int, default=2, help="Morgan radius (default 2)")
            p.add_argument("--path-length", type=int, default=7, help="max path length (default 7)")
            p.add_argument("--bits", type=int, default=2048, help="fingerprint width (default 2048)")
        else:
            p.add_argument("--strip-names", action="store_true",
                           help='replace a leading name in reference captions with "The molecule is"')

    p = sub.add_parser("normalize", parents=[shared], help="rescale valid-only metrics by validity")
    p.add_argument("report", help="JSON report from eval-molgen")

    p = sub.add_parser("select-valid", parents=[shared], help="pick the first valid candidate per record")
    p.add_argument("candidates", help="TSV with id, input, ground_truth, pred_1 .. pred_k")

    p = sub.add_parser("significance", parents=[shared], help="t-test between two per-example files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--metric", required=True, help="column to compare")
    p.add_argument("--mode", choices=("paired", "independent"), default="paired")

    p = sub.add_parser("canonicalize", parents=[shared], help="canonical SMILES, one per input line")
    p.add_argument("smiles_file")

    p = sub.add_parser("fingerprint", parents=[shared], help="hex fingerprints, one per input line")
    p.add_argument("smiles_file")
    p.add_argument("--family", choices=FAMILIES, default="morgan")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--max-len", type=int, default=7)
    p.add_argument("--bits", type=int, default=2048)

    p = sub.add_parser("corrupt", parents=[shared], help="write span-corruption training pairs")
    p.add_argument("--text", required=True, help="text corpus, one sequence per line")
    p.add_argument("--smiles", required=True, help="SMILES corpus, one molecule per line")
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--rate", type=float, default=0.15)
    p.add_argument("--mean-span", type=float, default=3.0)
    p.add_argument("--max-seq-len", type=int, default=512)
    p.add_argument("--sentinels", type=int, default=100)
    p.add_argument("--num-batches", type=int, help="default: every full batch the corpora allow")
    p.add_argument("--out", required=True, help="output TSV")

    p = sub.add_parser("retrieval-eval", parents=[shared], help="mean rank, MRR and Hits@k")
    p.add_argument("--queries", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--gold", required=True, help="TSV of query_id, corpus_id")
    p.add_argument("--k", default="1,10,100", help="comma-separated cutoffs")
    p.add_argument("--ranks-out", help="write per-query ranks as TSV")
    p.add_argument("--skip-missing", action="store_true",
                   help="exclude queries without embeddings instead of failing")
    return parser


def _embeddings(specs: Sequence[str]) -> dict:
    tables = {}
    for spec in specs:
        role, sep, path = spec.partition(":")
        if not sep or role not in ROLES:
            raise ConfigError(f"--embeddings expects ROLE:FILE with ROLE in {', '.join(ROLES)}, got {spec!r}")
        if role in tables:
            raise ConfigError(f"embedding role {role!r} given twice")
        tables[role] = load_embeddings(path)
    return tables


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(args, data: dict, report: MetricReport | None = None) -> str:
    if args.format == "json":
        return to_json(data)
    return report_table(report) if report is not None else flat_table(data)


def _smiles_lines(path: str):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            yield lineno, fields[0] if fields else ""


def _cmd_eval(args) -> int:
    records = read_records(args.records)
    metrics = tuple(m.strip() for m in args.metrics.split(",")) if args.metrics else None
    options = EvalOptions(metrics=metrics, embeddings=_embeddings(args.embeddings), jobs=args.jobs)
    if args.command == "eval-molgen":
        options.morgan_radius, options.path_length, options.fp_bits = args.radius, args.path_length, args.bits
        report = eval_molgen(records, options)
    else:
        options.strip_names = args.strip_names
        report = eval_caption(records, options)
    if args.per_example:
        with open(args.per_example, "w", encoding="utf-8", newline="\n") as fh:
            write_per_example(report, fh)
    _emit(args, _render(args, report.to_dict(), report))
    return EXIT_OK


def _cmd_normalize(args) -> int:
    try:
        with open(args.report, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", args.report, exc.lineno) from None
    report = normalize_by_validity(MetricReport.from_dict(data))
    _emit(args, _render(args, report.to_dict(), report))
    return EXIT_OK


def _cmd_select(args) -> int:
    chosen, selections = select_records(read_candidates(args.candidates))
    flagged = [s.id for s in selections if not s.valid]
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            write_records(fh, chosen)
    else:
        write_records(sys.stdout, chosen)
    if flagged:
        print(f"{len(flagged)} record(s) without a valid candidate: {', '.join(flagged)}", file=sys.stderr)
    return EXIT_OK


def _cmd_significance(args) -> int:
    a = read_per_example(args.a, args.metric)
    b = read_per_example(args.b, args.metric)
    if args.mode == "paired":
        if a.keys() != b.keys():
            raise InputError("paired test needs the same record ids in both files")
        keys = [k for k in a if a[k] is not None and b[k] is not None]
        xs, ys = [a[k] for k in keys], [b[k] for k in keys]
    else:
        xs = [v for v in a.values() if v is not None]
        ys = [v for v in b.values() if v is not None]
    try:
        res = significance(xs, ys, args.mode)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    data = {
        "metric": args.metric,
        "mode": args.mode,
        "n_a": len(xs),
        "n_b": len(ys),
        "statistic": res.statistic,
        "pvalue": res.pvalue,
        "df": res.df,
        "warning": res.warning,
    }
    _emit(args, _render(args, data))
    return EXIT_OK


def _cmd_canonicalize(args) -> int:
    out = []
    for lineno, smiles in _smiles_lines(args.smiles_file):
        try:
            out.append(canonicalize(parse(smiles)))
        except ParseError as exc:
            print(f"{args.smiles_file}:{lineno}: {exc}", file=sys.stderr)
            out.append("")
    _emit(args, "".join(s + "\n" for s in out))
    return EXIT_OK


def _cmd_fingerprint(args) -> int:
    out = []
    for lineno, smiles in _smiles_lines(args.smiles_file):
        try:
            mol = parse(smiles)
        except ParseError as exc:
            print(f"{args.smiles_file}:{lineno}: {exc}", file=sys.stderr)
            out.append("")
            continue
        try:
            fp = fingerprint(mol, args.family, radius=args.radius, max_len=args.max_len, bit_width=args.bits)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        out.append(fp.to_hex())
    _emit(args, "".join(s + "\n" for s in out))
    return EXIT_OK


def _cmd_corrupt(args) -> int:
    try:
        config = CorruptionConfig(
            corruption_rate=args.rate,
            mean_span_length=args.mean_span,
            n_sentinels=args.sentinels,
            seed=args.seed,
            max_seq_len=args.max_seq_len,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.batch_size <= 0 or args.batch_size % 2:
        raise ConfigError("--batch-size must be a positive even number")
    with open(args.text, encoding="utf-8") as text, open(args.smiles, encoding="utf-8") as smiles, \
            open(args.out, "w", encoding="utf-8", newline="\n") as out:
        out.write("modality\tinput_tokens\ttarget_tokens\n")
        rows = batches = 0
        for batch in iter_batches(iter(text), iter(smiles), args.batch_size, config, args.num_batches):
            rows += write_examples(batch, out)
            batches += 1
    _emit(args, _render(args, {"batches": batches, "examples": rows}))
    return EXIT_OK


def _cmd_retrieval(args) -> int:
    try:
        ks = [int(k) for k in args.k.split(",")]
    except ValueError:
        raise ConfigError(f"--k expects comma-separated integers, got {args.k!r}") from None
    queries = load_embeddings(args.queries)
    corpus = load_embeddings(args.corpus)
    try:
        result = rank_retrieval(queries, corpus, read_gold(args.gold), ks, skip_missing=args.skip_missing)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    if args.ranks_out:
        write_ranks(result, args.ranks_out)
    data = result.to_dict()
    if args.format == "table":
        flat = {k: v for k, v in data.items() if k != "hits"}
        flat.update({f"hits@{k}": v for k, v in data["hits"].items()})
        _emit(args, flat_table(flat))
    else:
        _emit(args, to_json(data))
    return EXIT_OK


_COMMANDS = {
    "eval-molgen": _cmd_eval,
    "eval-caption": _cmd_eval,
    "normalize": _cmd_normalize,
    "select-valid": _cmd_select,
    "significance": _cmd_significance,
    "canonicalize": _cmd_canonicalize,
    "fingerprint": _cmd_fingerprint,
    "corrupt": _cmd_corrupt,
    "retrieval-eval": _cmd_retrieval,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"moltext: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, EmbeddingFormatError) as exc:
        print(f"moltext: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"moltext: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"moltext: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
