"""Batch command-line surface for the disambiguation pipeline.

Subcommands cover the full workflow: ingest a dump into a description TSV,
summarize datasets, decode predictions, score them, and compare two systems.
All machine output is JSON (or JSONL for predictions); exit codes are 0 on
success, 1 on a validation error, 2 on a runtime error.
"""

from __future__ import annotations

import argparse
import json
import re
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from .bridge import BridgeProcess
from .datasets import (
    FORMATS,
    ReadCounters,
    build_train_index,
    compute_stats,
    read_dataset,
)
from .errors import DatasetParseError, EDKitError, MissingGoldError
from .evaluation import build_records, evaluation_report, frequency_class_report, mcnemar
from .extractive import extract
from .generative import DEFAULT_BEAM, decode as decode_generative
from .representation import MODES, make_representation, make_representations, representation_length_stats
from .scorers import WhitespaceTokenizer, ngram_scorer, oracle_scorer, overlap_span_scorer
from .types import EDInstance
from .wikidata import DescriptionMap, ingest_dump_to_tsv


class _UsageError(Exception):
    """Flag or input validation failure; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _require_file(path: str, flag: str) -> str:
    if not Path(path).is_file():
        raise _UsageError(f"{flag}: file not found: {path}")
    return path


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _load_predictions(path: str) -> dict[str, str | None]:
    """Read a predictions JSONL file into an id -> predicted title map."""
    predictions: dict[str, str | None] = {}
    with open(path, "r", encoding="utf-8") as src:
        for lineno, line in enumerate(src, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except ValueError as exc:
                raise DatasetParseError(f"invalid JSON in predictions: {exc}", line=lineno) from exc
            if not isinstance(record, dict) or "id" not in record or "predicted" not in record:
                raise DatasetParseError('prediction records need "id" and "predicted"', line=lineno)
            instance_id = record["id"]
            if instance_id in predictions:
                raise DatasetParseError(f"duplicate prediction id {instance_id!r}", line=lineno)
            predictions[instance_id] = record["predicted"]
    return predictions


def _read_instances(args, path: str, counters: ReadCounters | None = None) -> list[EDInstance]:
    candidates = getattr(args, "candidates", None)
    return list(read_dataset(path, args.format, candidates_path=candidates, counters=counters))


def _date_from_name(path: str) -> str:
    """Dump date from the conventional 8-digit stamp in the filename."""
    match = re.search(r"(\d{4})(\d{2})(\d{2})", Path(path).name)
    if not match:
        return ""
    return "-".join(match.groups())


def _open_bridge(args) -> BridgeProcess:
    if not args.bridge_cmd:
        raise _UsageError("--bridge-cmd is required when --scorer bridge is selected")
    return BridgeProcess(shlex.split(args.bridge_cmd))


def _cmd_ingest(args) -> int:
    _require_file(args.dump, "--dump")
    stats = ingest_dump_to_tsv(
        args.dump,
        args.out,
        language=args.lang,
        dump_date=_date_from_name(args.dump),
        jobs=args.jobs,
    )
    print(_dump_json(stats.to_dict()))
    return 0


def _cmd_stats(args) -> int:
    _require_file(args.dataset, "--dataset")
    _require_file(args.descriptions, "--descriptions")
    mapping = DescriptionMap.load_tsv(args.descriptions)
    stats = compute_stats(_read_instances(args, args.dataset), mapping)
    print(_dump_json(stats.to_dict()))
    return 0


_GENERATIVE_SCORERS = ("ngram", "oracle", "bridge")
_EXTRACTIVE_SCORERS = ("overlap", "oracle", "bridge")


def _decode_one(instance: EDInstance, mapping: DescriptionMap, args, bridge: BridgeProcess | None) -> dict:
    """Decode a single instance; failures become abstention records."""
    try:
        reps = make_representations(instance, mapping)
        if args.scorer == "oracle":
            if instance.gold is None:
                raise MissingGoldError(f"{instance.id}: oracle scoring needs gold labels")
            gold_surface = make_representation(instance.gold, mapping).surface
        if args.mode == "generative":
            tokenizer = bridge if bridge is not None else WhitespaceTokenizer()
            if args.scorer == "ngram":
                scorer = ngram_scorer(reps, tokenizer)
            elif args.scorer == "oracle":
                scorer = oracle_scorer(gold_surface, tokenizer)
            else:
                scorer = bridge
            result = decode_generative(instance, reps, scorer, tokenizer, beam=args.beam)
            ranked = result.ranked
        else:
            if bridge is not None:
                tokenizer = bridge
            elif args.budget is not None:
                tokenizer = WhitespaceTokenizer()
            else:
                tokenizer = None
            if args.scorer == "overlap":
                scorer = overlap_span_scorer()
            elif args.scorer == "oracle":
                scorer = oracle_scorer(gold_surface)
            else:
                scorer = bridge
            result = extract(instance, reps, scorer, budget=args.budget, tokenizer=tokenizer)
            ranked = result.scores
        return {"id": instance.id, "predicted": result.winner, "scores": ranked}
    except EDKitError as exc:
        print(f"warning: {instance.id}: {exc}", file=sys.stderr)
        return {"id": instance.id, "predicted": None, "scores": []}


def _cmd_decode(args) -> int:
    _require_file(args.dataset, "--dataset")
    _require_file(args.descriptions, "--descriptions")
    if args.scorer not in (_GENERATIVE_SCORERS if args.mode == "generative" else _EXTRACTIVE_SCORERS):
        raise _UsageError(f"--scorer {args.scorer} does not apply to --mode {args.mode}")
    if args.mode == "generative" and args.budget is not None:
        raise _UsageError("--budget applies to extractive mode only")
    if args.mode == "extractive" and args.beam is not None:
        raise _UsageError("--beam applies to generative mode only")
    if args.beam is None:
        args.beam = DEFAULT_BEAM
    if args.beam < 1:
        raise _UsageError("--beam must be at least 1")
    if args.jobs < 1:
        raise _UsageError("--jobs must be at least 1")

    mapping = DescriptionMap.load_tsv(args.descriptions)
    instances = _read_instances(args, args.dataset)
    bridge = _open_bridge(args) if args.scorer == "bridge" else None
    try:
        if bridge is not None and not bridge.supports(args.mode):
            raise _UsageError(f"bridge does not support mode {args.mode!r} (offers {list(bridge.modes)})")
        if args.jobs == 1:
            rows = [_decode_one(inst, mapping, args, bridge) for inst in instances]
        else:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                rows = list(pool.map(lambda inst: _decode_one(inst, mapping, args, bridge), instances))
    finally:
        if bridge is not None:
            bridge.close()
    with open(args.out, "w", encoding="utf-8", newline="\n") as out:
        for row in rows:
            out.write(_dump_json(row) + "\n")
    return 0


def _cmd_evaluate(args) -> int:
    if len(args.predictions) != len(args.gold):
        raise _UsageError("--predictions and --gold must be given the same number of times")
    for path in args.predictions:
        _require_file(path, "--predictions")
    for path in args.gold:
        _require_file(path, "--gold")
    if args.train:
        _require_file(args.train, "--train")
    names = [Path(path).stem for path in args.gold]
    if len(set(names)) != len(names):
        raise _UsageError("--gold files must have distinct stems to name the datasets")
    ood_names = [n for n in (args.ood or "").split(",") if n]
    unknown = sorted(set(ood_names) - set(names))
    if unknown:
        raise _UsageError(f"--ood names not among gold datasets: {', '.join(unknown)}")

    records_by_dataset = []
    all_records = []
    all_instances: list[EDInstance] = []
    for name, pred_path, gold_path in zip(names, args.predictions, args.gold):
        predictions = _load_predictions(pred_path)
        instances = _read_instances(args, gold_path)
        records = build_records(predictions, instances)
        records_by_dataset.append((name, records))
        all_records.extend(records)
        all_instances.extend(instances)
    report = evaluation_report(records_by_dataset, ood_names)
    document = report.to_dict()
    if args.train:
        index = build_train_index(_read_instances(args, args.train))
        freq = frequency_class_report(all_records, all_instances, index, lfc_scope=args.lfc_scope)
        document["frequency_classes"] = freq.to_dict()["classes"]
    print(_dump_json(document))
    return 0


def _cmd_compare(args) -> int:
    _require_file(args.a, "--a")
    _require_file(args.b, "--b")
    _require_file(args.gold, "--gold")
    instances = _read_instances(args, args.gold)
    records_a = build_records(_load_predictions(args.a), instances)
    records_b = build_records(_load_predictions(args.b), instances)
    method = "exact-binomial" if args.method == "exact" else args.method
    result = mcnemar(records_a, records_b, method=method, alpha=args.alpha)
    print(_dump_json(result.to_dict()))
    return 0


def _cmd_rep_stats(args) -> int:
    _require_file(args.dataset, "--dataset")
    _require_file(args.descriptions, "--descriptions")
    mapping = DescriptionMap.load_tsv(args.descriptions)
    instances = _read_instances(args, args.dataset)
    bridge = _open_bridge(args) if args.scorer == "bridge" else None
    try:
        tokenizer = bridge if bridge is not None else WhitespaceTokenizer()
        mean, p99 = representation_length_stats(instances, mapping, tokenizer, mode=args.mode)
    finally:
        if bridge is not None:
            bridge.close()
    print(_dump_json({"mode": args.mode, "mean": mean, "p99": p99}))
    return 0


def _add_dataset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=FORMATS, default="canonical-jsonl")
    parser.add_argument("--candidates", help="JSONL sidecar mapping instance ids to candidate lists")


def build_parser() -> _Parser:
    parser = _Parser(prog="edkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest-wikidata", help="turn an entity dump into a description TSV")
    p.add_argument("--dump", required=True)
    p.add_argument("--lang", default="en")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("stats", help="dataset summary statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--descriptions", required=True)
    _add_dataset_flags(p)
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("decode", help="predict an entity for every instance")
    p.add_argument("--mode", choices=("generative", "extractive"), required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--descriptions", required=True)
    p.add_argument("--scorer", choices=("ngram", "overlap", "oracle", "bridge"), required=True)
    p.add_argument("--bridge-cmd", help="scorer subprocess command line")
    p.add_argument("--beam", type=int, default=None)
    p.add_argument("--budget", type=int, default=None, help="token budget for assembled inputs")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_dataset_flags(p)
    p.set_defaults(handler=_cmd_decode)

    p = sub.add_parser("evaluate", help="score prediction files against gold datasets")
    p.add_argument("--predictions", action="append", required=True)
    p.add_argument("--gold", action="append", required=True)
    p.add_argument("--train", help="training dataset for the frequency-class report")
    p.add_argument("--ood", help="comma-separated dataset names held out of domain")
    p.add_argument("--lfc-scope", choices=("mention", "global"), default="mention")
    _add_dataset_flags(p)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("compare", help="paired significance test between two prediction files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--gold", required=True, help="dataset both prediction files cover")
    p.add_argument("--method", choices=("chi2-cc", "exact"), default="chi2-cc")
    p.add_argument("--alpha", type=float, default=0.01)
    _add_dataset_flags(p)
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("rep-stats", help="token length statistics of candidate representations")
    p.add_argument("--dataset", required=True)
    p.add_argument("--descriptions", required=True)
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--scorer", choices=("bridge", "whitespace"), default="whitespace")
    p.add_argument("--bridge-cmd", help="scorer subprocess command line")
    _add_dataset_flags(p)
    p.set_defaults(handler=_cmd_rep_stats)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EDKitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
