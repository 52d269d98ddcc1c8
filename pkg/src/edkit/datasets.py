"""Benchmark readers, corpus statistics, and the training-frequency index.

Canonical interchange format is JSONL, one instance per line:

    {"id": "d1#0", "text": "...", "mention": {"start": 0, "end": 7},
     "candidates": ["Ronaldo", "Cristiano Ronaldo"], "gold": "Ronaldo"}

The AIDA-CoNLL column format (token TAB B/I TAB mention TAB yago TAB
wikipedia-url ...) is converted on the fly: document text joins tokens with
single spaces, gold comes from the URL column, --NME-- mentions are skipped,
and candidate sets are joined from a sidecar JSONL of
{"mention_id": ..., "candidates": [...]} keyed by "{docid}#{mention_index}".
"""

from __future__ import annotations

import json
import logging
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator
from urllib.parse import unquote

from .errors import DatasetParseError, MissingGoldError
from .types import EDInstance, MentionSpan, normalize_title
from .wikidata import DescriptionMap

log = logging.getLogger(__name__)

FORMATS = ("canonical-jsonl", "aida-conll")

_WIKI_URL = re.compile(r"^https?://en\.wikipedia\.org/wiki/(.+)$")
_WS_RUN = re.compile(r"\s+")


def collapse_whitespace(surface: str) -> str:
    """Mention surface normalization: internal whitespace runs become one space."""
    return _WS_RUN.sub(" ", surface)


@dataclass(slots=True)
class ReadCounters:
    """Side-channel tallies a reader fills while streaming instances."""

    duplicate_candidates: int = 0
    gold_not_in_candidates: int = 0


@dataclass(frozen=True, slots=True)
class DatasetStats:
    instances: int
    candidates_total: int
    candidates_unique: int
    failures_total: int
    failures_unique: int

    def to_dict(self) -> dict[str, int]:
        return {
            "instances": self.instances,
            "candidates_total": self.candidates_total,
            "candidates_unique": self.candidates_unique,
            "failures_total": self.failures_total,
            "failures_unique": self.failures_unique,
        }


def read_dataset(
    path: str | os.PathLike[str],
    format: str = "canonical-jsonl",
    candidates_path: str | os.PathLike[str] | None = None,
    counters: ReadCounters | None = None,
) -> Iterator[EDInstance]:
    """Yield EDInstances in file order; see module docstring for formats."""
    if format not in FORMATS:
        raise ValueError(f"unknown dataset format {format!r}; expected one of {FORMATS}")
    sidecar = _load_candidate_sidecar(candidates_path) if candidates_path else None
    if format == "canonical-jsonl":
        return _read_canonical(path, sidecar, counters)
    return _read_aida_conll(path, sidecar, counters)


def _load_candidate_sidecar(path: str | os.PathLike[str]) -> dict[str, list[str]]:
    sidecar: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8") as src:
        for lineno, line in enumerate(src, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                sidecar[obj["mention_id"]] = list(obj["candidates"])
            except (ValueError, KeyError, TypeError) as exc:
                raise DatasetParseError(f"bad candidate sidecar entry: {exc}", lineno) from exc
    return sidecar


def _dedupe_candidates(raw: Iterable[str], instance_id: str, counters: ReadCounters | None) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    dupes = 0
    for title in raw:
        normalized = normalize_title(title)
        if normalized in seen:
            dupes += 1
        else:
            seen[normalized] = None
    if dupes:
        if counters is not None:
            counters.duplicate_candidates += dupes
        log.warning("%s: dropped %d duplicate candidate(s)", instance_id, dupes)
    return tuple(seen)


def _finish_instance(
    instance_id: str,
    text: str,
    span: MentionSpan,
    candidates: Iterable[str],
    gold: str | None,
    counters: ReadCounters | None,
    lineno: int,
) -> EDInstance:
    deduped = _dedupe_candidates(candidates, instance_id, counters)
    gold_title = normalize_title(gold) if gold is not None else None
    instance = EDInstance(instance_id, text, span, deduped, gold_title)
    if gold_title is not None and not instance.gold_in_candidates:
        if counters is not None:
            counters.gold_not_in_candidates += 1
    return instance


def _read_canonical(
    path: str | os.PathLike[str],
    sidecar: dict[str, list[str]] | None,
    counters: ReadCounters | None,
) -> Iterator[EDInstance]:
    with open(path, "r", encoding="utf-8") as src:
        for lineno, line in enumerate(src, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise DatasetParseError(f"bad JSON: {exc}", lineno) from exc
            try:
                instance_id = obj["id"]
                text = obj["text"]
                mention = obj["mention"]
                span = MentionSpan(int(mention["start"]), int(mention["end"]))
                candidates = obj.get("candidates", [])
                gold = obj.get("gold")
            except (KeyError, TypeError) as exc:
                raise DatasetParseError(f"missing field: {exc}", lineno) from exc
            if sidecar is not None and instance_id in sidecar:
                candidates = sidecar[instance_id]
            yield _finish_instance(instance_id, text, span, candidates, gold, counters, lineno)


def write_dataset(instances: Iterable[EDInstance], out: IO[str]) -> int:
    """Write canonical JSONL; inverse of the canonical reader. Returns count."""
    count = 0
    for inst in instances:
        record = {
            "id": inst.id,
            "text": inst.text,
            "mention": {"start": inst.mention.start, "end": inst.mention.end},
            "candidates": list(inst.candidates),
        }
        if inst.gold is not None:
            record["gold"] = inst.gold
        out.write(json.dumps(record, ensure_ascii=False) + "\n")
        count += 1
    return count


_DOCSTART = "-DOCSTART-"


def _read_aida_conll(
    path: str | os.PathLike[str],
    sidecar: dict[str, list[str]] | None,
    counters: ReadCounters | None,
) -> Iterator[EDInstance]:
    with open(path, "r", encoding="utf-8") as src:
        doc_id: str | None = None
        doc_line = 0
        tokens: list[str] = []
        # (start_token, end_token, gold_title) collected per document
        mentions: list[tuple[int, int, str | None]] = []
        open_mention: tuple[int, str | None] | None = None

        def flush() -> Iterator[EDInstance]:
            nonlocal open_mention
            if open_mention is not None:
                mentions.append((open_mention[0], len(tokens), open_mention[1]))
                open_mention = None
            if doc_id is None:
                return
            text = " ".join(tokens)
            offsets: list[int] = []
            pos = 0
            for tok in tokens:
                offsets.append(pos)
                pos += len(tok) + 1
            for k, (t0, t1, gold) in enumerate(mentions):
                if gold is None:
                    continue  # --NME--: no in-KB gold to disambiguate against
                instance_id = f"{doc_id}#{k}"
                start = offsets[t0]
                end = offsets[t1 - 1] + len(tokens[t1 - 1])
                candidates = sidecar.get(instance_id, []) if sidecar is not None else []
                yield _finish_instance(
                    instance_id, text, MentionSpan(start, end), candidates, gold, counters, doc_line
                )

        for lineno, line in enumerate(src, start=1):
            line = line.rstrip("\n")
            if line.startswith(_DOCSTART):
                yield from flush()
                tokens, mentions = [], []
                inner = line[line.find("(") + 1 : line.rfind(")")]
                doc_id = inner.split()[0] if inner.split() else f"doc{lineno}"
                doc_line = lineno
                continue
            if not line.strip():
                if open_mention is not None:
                    mentions.append((open_mention[0], len(tokens), open_mention[1]))
                    open_mention = None
                continue
            cols = line.split("\t")
            token = cols[0]
            if len(cols) >= 4:
                flag = cols[1]
                gold = _gold_from_columns(cols, lineno)
                if flag == "B":
                    if open_mention is not None:
                        mentions.append((open_mention[0], len(tokens), open_mention[1]))
                    open_mention = (len(tokens), gold)
                elif flag != "I":
                    raise DatasetParseError(f"expected B or I in column 2, got {flag!r}", lineno)
            else:
                if open_mention is not None:
                    mentions.append((open_mention[0], len(tokens), open_mention[1]))
                    open_mention = None
            tokens.append(token)
        yield from flush()


def _gold_from_columns(cols: list[str], lineno: int) -> str | None:
    if cols[3] == "--NME--":
        return None
    if len(cols) >= 5 and cols[4]:
        match = _WIKI_URL.match(cols[4])
        if not match:
            raise DatasetParseError(f"unparseable Wikipedia URL {cols[4]!r}", lineno)
        return normalize_title(unquote(match.group(1)))
    # Some distributions carry only the YAGO column; fall back to it.
    return normalize_title(unquote(cols[3]))


def compute_stats(instances: Iterable[EDInstance], mapping: DescriptionMap) -> DatasetStats:
    """Instance/candidate/failure counts in one streaming pass.

    A failure is a candidate occurrence whose description lookup misses;
    unique counts are over distinct titles.
    """
    n_instances = 0
    total = 0
    unique: set[str] = set()
    failures_total = 0
    failed: set[str] = set()
    for inst in instances:
        n_instances += 1
        for title in inst.candidates:
            total += 1
            unique.add(title)
            if mapping.lookup(title) is None:
                failures_total += 1
                failed.add(title)
    return DatasetStats(n_instances, total, len(unique), failures_total, len(failed))


@dataclass(slots=True)
class TrainIndex:
    """Mention -> gold-entity frequency table built from a training split."""

    mention_counts: dict[str, Counter] = field(default_factory=dict)
    entities: set[str] = field(default_factory=set)
    pairs: set[tuple[str, str]] = field(default_factory=set)

    def most_frequent(self, mention_surface: str) -> str | None:
        """Most frequent gold for a mention; ties break to the smaller title."""
        counts = self.mention_counts.get(mention_surface)
        if not counts:
            return None
        return min(counts, key=lambda title: (-counts[title], title))

    def seen_mention(self, mention_surface: str) -> bool:
        return mention_surface in self.mention_counts

    def seen_entity(self, title: str) -> bool:
        return title in self.entities

    def seen_pair(self, mention_surface: str, title: str) -> bool:
        return (mention_surface, title) in self.pairs


def build_train_index(train: Iterable[EDInstance]) -> TrainIndex:
    """Count every (mention surface, gold) occurrence in the training split."""
    index = TrainIndex()
    for inst in train:
        if inst.gold is None:
            raise MissingGoldError(f"{inst.id}: training instance has no gold entity")
        surface = collapse_whitespace(inst.mention_text)
        index.mention_counts.setdefault(surface, Counter())[inst.gold] += 1
        index.entities.add(inst.gold)
        index.pairs.add((surface, inst.gold))
    return index
