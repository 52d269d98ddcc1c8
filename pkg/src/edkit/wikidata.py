"""Stream a Wikidata entities dump into a persisted title -> description map.

The dump is a JSON array with one entity object per line ("[" first, "]"
last, lines comma-terminated except the last). Only two paths are read from
each entity: sitelinks.enwiki.title and descriptions.<lang>.value.

The persisted form is UTF-8 TSV, one "title<TAB>description" line, sorted by
title byte order, preceded by a single "#" header line carrying metadata.
Ingest never holds the whole map in memory: parsed records spill to sorted
run files and a k-way merge writes the final TSV, so peak memory is bounded
by the batch size regardless of dump size.
"""

from __future__ import annotations

import bz2
import gzip
import heapq
import io
import json
import multiprocessing
import os
import shutil
import tempfile
from dataclasses import dataclass
from functools import partial
from typing import IO, Iterable, Iterator

from .errors import CorruptStreamError, EmptyTitleError
from .types import normalize_title

TSV_HEADER_PREFIX = "# edkit-descriptions"

# Records per in-memory sort batch before spilling to a run file.
DEFAULT_BATCH_RECORDS = 500_000
# Lines handed to one worker task.
_CHUNK_LINES = 20_000


@dataclass(frozen=True, slots=True)
class IngestStats:
    entities_scanned: int = 0
    with_enwiki_sitelink: int = 0
    with_description: int = 0
    emitted: int = 0
    malformed_lines: int = 0
    collisions: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "entities_scanned": self.entities_scanned,
            "with_enwiki_sitelink": self.with_enwiki_sitelink,
            "with_description": self.with_description,
            "emitted": self.emitted,
            "malformed_lines": self.malformed_lines,
            "collisions": self.collisions,
        }


class DescriptionMap:
    """In-memory title -> description mapping with TSV persistence."""

    def __init__(
        self,
        entries: dict[str, str] | None = None,
        language: str = "en",
        dump_date: str = "",
    ):
        self.entries = entries if entries is not None else {}
        self.language = language
        self.dump_date = dump_date

    def lookup(self, title: str) -> str | None:
        """Stored description, or None; None triggers the title-only fallback."""
        return self.entries.get(title)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, title: str) -> bool:
        return title in self.entries

    def save_tsv(self, path: str | os.PathLike[str]) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as out:
            out.write(_header_line(self.language, self.dump_date, len(self.entries)))
            # UTF-8 byte order coincides with code point order, so plain
            # str sort matches the persisted byte order.
            for title in sorted(self.entries):
                out.write(f"{title}\t{self.entries[title]}\n")

    @classmethod
    def load_tsv(cls, path: str | os.PathLike[str]) -> "DescriptionMap":
        entries: dict[str, str] = {}
        language, dump_date = "en", ""
        with open(path, "r", encoding="utf-8") as src:
            first = src.readline()
            if first.startswith("#"):
                language, dump_date, _ = _parse_header(first)
            elif first.strip():
                title, _, desc = first.rstrip("\n").partition("\t")
                entries[title] = desc
            for line in src:
                line = line.rstrip("\n")
                if not line:
                    continue
                title, _, desc = line.partition("\t")
                entries[title] = desc
        return cls(entries, language=language, dump_date=dump_date)


def _header_line(language: str, dump_date: str, count: int) -> str:
    return f"{TSV_HEADER_PREFIX} lang={language} date={dump_date} entries={count}\n"


def _parse_header(line: str) -> tuple[str, str, int]:
    language, dump_date, count = "en", "", 0
    for token in line.rstrip("\n").split(" "):
        if token.startswith("lang="):
            language = token[5:]
        elif token.startswith("date="):
            dump_date = token[5:]
        elif token.startswith("entries="):
            count = int(token[8:])
    return language, dump_date, count


def open_dump(path: str | os.PathLike[str]) -> IO[bytes]:
    """Open a dump file, sniffing bz2/gzip magic; plain files pass through."""
    raw = open(path, "rb")
    magic = raw.read(3)
    raw.seek(0)
    if magic.startswith(b"BZh"):
        return bz2.open(raw)  # type: ignore[return-value]
    if magic.startswith(b"\x1f\x8b"):
        return gzip.open(raw)  # type: ignore[return-value]
    return raw


def _clean_description(desc: str) -> str:
    # Keep the single-line invariant and TSV integrity.
    return desc.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def _parse_chunk(lines: list[bytes], language: str) -> tuple[list[tuple[str, str]], tuple[int, int, int, int]]:
    """Parse one chunk of dump lines into (title, description) records.

    Returns the records plus (scanned, with_sitelink, with_description,
    malformed) counts for the chunk.
    """
    records: list[tuple[str, str]] = []
    scanned = sitelinked = described = malformed = 0
    for raw in lines:
        line = raw.strip()
        if not line or line in (b"[", b"]"):
            continue
        if line.endswith(b","):
            line = line[:-1]
        try:
            entity = json.loads(line)
        except (ValueError, UnicodeDecodeError):
            malformed += 1
            continue
        if not isinstance(entity, dict):
            malformed += 1
            continue
        scanned += 1
        sitelinks = entity.get("sitelinks")
        if not isinstance(sitelinks, dict):
            continue
        enwiki = sitelinks.get("enwiki")
        if not isinstance(enwiki, dict):
            continue
        raw_title = enwiki.get("title")
        if not isinstance(raw_title, str):
            continue
        try:
            title = normalize_title(raw_title)
        except EmptyTitleError:
            continue
        sitelinked += 1
        descriptions = entity.get("descriptions")
        if not isinstance(descriptions, dict):
            continue
        entry = descriptions.get(language)
        if not isinstance(entry, dict):
            continue
        value = entry.get("value")
        if not isinstance(value, str) or not value:
            continue
        described += 1
        records.append((title, _clean_description(value)))
    return records, (scanned, sitelinked, described, malformed)


def _iter_line_chunks(stream: IO[bytes]) -> Iterator[list[bytes]]:
    while True:
        chunk = stream.readlines(_CHUNK_LINES * 64)
        if not chunk:
            return
        yield chunk


def _iter_parsed(
    stream: IO[bytes], language: str, jobs: int
) -> Iterator[tuple[list[tuple[str, str]], tuple[int, int, int, int]]]:
    chunks = _iter_line_chunks(stream)
    if jobs <= 1:
        for chunk in chunks:
            yield _parse_chunk(chunk, language)
        return
    with multiprocessing.Pool(jobs) as pool:
        # imap preserves chunk order, so record sequence (and therefore
        # first-in-dump-order collision handling) is independent of jobs.
        yield from pool.imap(partial(_parse_chunk, language=language), chunks, chunksize=1)


def _spill_run(records: list[tuple[str, str, int]], tmpdir: str, index: int) -> str:
    # Order by (title, seq): dedup keeps the smallest seq per title, which
    # is the first occurrence in dump order.
    records.sort(key=lambda rec: (rec[0], rec[2]))
    path = os.path.join(tmpdir, f"run-{index:05d}.tsv")
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.writelines(f"{title}\t{seq}\t{desc}\n" for title, desc, seq in records)
    return path


def _run_key(line: str) -> tuple[str, int]:
    title, seq, _ = line.split("\t", 2)
    return title, int(seq)


def ingest_dump_to_tsv(
    dump: str | os.PathLike[str] | IO[bytes],
    out_path: str | os.PathLike[str],
    language: str = "en",
    dump_date: str = "",
    jobs: int = 1,
    batch_records: int = DEFAULT_BATCH_RECORDS,
) -> IngestStats:
    """Stream a dump into a sorted description TSV with bounded memory.

    Duplicated normalized titles keep the first occurrence in dump order and
    count as collisions. Output bytes are identical for any jobs value.
    """
    close_stream = False
    if isinstance(dump, (str, os.PathLike)):
        stream = open_dump(dump)
        close_stream = True
    else:
        stream = dump
    scanned = sitelinked = described = malformed = 0
    try:
        with tempfile.TemporaryDirectory(prefix="edkit-ingest-") as tmpdir:
            runs: list[str] = []
            batch: list[tuple[str, str, int]] = []
            seq = 0
            try:
                for records, counts in _iter_parsed(stream, language, jobs):
                    scanned += counts[0]
                    sitelinked += counts[1]
                    described += counts[2]
                    malformed += counts[3]
                    for title, desc in records:
                        batch.append((title, desc, seq))
                        seq += 1
                    if len(batch) >= batch_records:
                        runs.append(_spill_run(batch, tmpdir, len(runs)))
                        batch = []
            except (OSError, EOFError) as exc:
                raise CorruptStreamError(f"cannot read dump: {exc}") from exc
            if batch or not runs:
                runs.append(_spill_run(batch, tmpdir, len(runs)))
                del batch

            body_path = os.path.join(tmpdir, "body.tsv")
            emitted, collisions = _merge_runs(runs, body_path)
            with open(out_path, "w", encoding="utf-8", newline="\n") as out:
                out.write(_header_line(language, dump_date, emitted))
                with open(body_path, "r", encoding="utf-8") as body:
                    shutil.copyfileobj(body, out, 1 << 20)
    finally:
        if close_stream:
            stream.close()
    return IngestStats(
        entities_scanned=scanned,
        with_enwiki_sitelink=sitelinked,
        with_description=described,
        emitted=emitted,
        malformed_lines=malformed,
        collisions=collisions,
    )


def _merge_runs(runs: list[str], body_path: str) -> tuple[int, int]:
    """Merge sorted runs into the body file, deduplicating titles.

    The merge orders by (title, sequence number), so the first record of an
    equal-title group is the earliest in dump order and wins.
    """
    emitted = collisions = 0
    files: list[IO[str]] = [open(p, "r", encoding="utf-8") for p in runs]
    try:
        with open(body_path, "w", encoding="utf-8", newline="\n") as out:
            last_title: str | None = None
            for line in heapq.merge(*files, key=_run_key):
                title, _, desc = line.rstrip("\n").split("\t", 2)
                if title == last_title:
                    collisions += 1
                    continue
                out.write(f"{title}\t{desc}\n")
                last_title = title
                emitted += 1
    finally:
        for f in files:
            f.close()
    return emitted, collisions


def ingest_dump(
    dump: str | os.PathLike[str] | IO[bytes],
    language: str = "en",
    dump_date: str = "",
    jobs: int = 1,
) -> tuple[DescriptionMap, IngestStats]:
    """Ingest a dump and return the loaded map. Convenience for small dumps;
    the returned map lives in memory, so use ingest_dump_to_tsv at scale."""
    with tempfile.NamedTemporaryFile(suffix=".tsv", delete=False) as tmp:
        tmp_path = tmp.name
    try:
        stats = ingest_dump_to_tsv(dump, tmp_path, language=language, dump_date=dump_date, jobs=jobs)
        mapping = DescriptionMap.load_tsv(tmp_path)
    finally:
        os.unlink(tmp_path)
    return mapping, stats


def lookup(mapping: DescriptionMap, title: str) -> str | None:
    return mapping.lookup(title)
