"""Tabular corpus input and the immutable :class:`CorpusIndex`.

Two tab-separated files describe a corpus::

    papers.tsv        paper_id  venue_id  year  is_full_paper(0|1)
    authorships.tsv   paper_id  author_id  position  institution_id (may be empty)

A header line is skipped when its first field is ``paper_id``.
"""

import io
import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Optional

from .errors import (
    DuplicateKeyError,
    FormatVersionError,
    ParseError,
    ReferentialIntegrityError,
    ValidationError,
)

log = logging.getLogger(__name__)

CACHE_FORMAT = "acceptrank-corpus"
CACHE_VERSION = 1

PAPER_HEADER = ("paper_id", "venue_id", "year", "is_full_paper")
AUTHORSHIP_HEADER = ("paper_id", "author_id", "position", "institution_id")


@dataclass(frozen=True, order=True)
class PaperRecord:
    paper_id: str
    venue_id: str
    year: int
    is_full_paper: bool


@dataclass(frozen=True)
class AuthorshipRecord:
    paper_id: str
    author_id: str
    position: int
    institution_id: Optional[str] = None  # None means unknown affiliation

    def sort_key(self):
        return (self.paper_id, self.position, self.author_id, self.institution_id or "")


class AuthorshipList(list):
    """List of authorships that remembers how many exact duplicates were dropped."""

    duplicates = 0


def _iter_lines(stream, source=None):
    """Yield ``(line_no, text)`` from bytes, str, a path-less file object or lines."""
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    for no, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(f"invalid UTF-8 ({exc})", no, source) from None
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        yield no, line


def _is_header(fields):
    return fields[0] == "paper_id"


def parse_papers(stream, source=None):
    """Parse a papers table into a list of :class:`PaperRecord` in file order."""
    records = []
    seen = {}
    for no, line in _iter_lines(stream, source):
        fields = line.split("\t")
        if no == 1 and _is_header(fields):
            continue
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", no, source)
        pid, venue, year_s, flag = fields
        if not pid:
            raise ParseError("empty paper_id", no, source)
        if not venue:
            raise ParseError("empty venue_id", no, source)
        try:
            year = int(year_s)
        except ValueError:
            raise ParseError(f"non-integer year {year_s!r}", no, source) from None
        if flag not in ("0", "1"):
            raise ParseError(f"is_full_paper must be 0 or 1, got {flag!r}", no, source)
        if not 1900 <= year <= 2100:
            raise ValidationError(f"year {year} outside [1900, 2100]", no)
        if pid in seen:
            raise DuplicateKeyError(
                f"duplicate paper_id {pid!r} (first seen on line {seen[pid]})", no, source
            )
        seen[pid] = no
        records.append(PaperRecord(pid, venue, year, flag == "1"))
    return records


def parse_authorships(stream, source=None):
    """Parse an authorship table.

    Exact duplicate ``(paper_id, author_id, institution_id)`` rows collapse to
    one; the number dropped is available as ``result.duplicates``.
    """
    records = AuthorshipList()
    seen = set()
    positions = {}
    dups = 0
    for no, line in _iter_lines(stream, source):
        fields = line.split("\t")
        if no == 1 and _is_header(fields):
            continue
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", no, source)
        pid, author, pos_s, inst = fields
        if not pid or not author:
            raise ParseError("empty paper_id or author_id", no, source)
        try:
            pos = int(pos_s)
        except ValueError:
            raise ParseError(f"non-integer position {pos_s!r}", no, source) from None
        if pos < 1:
            raise ValidationError(f"author position must be >= 1, got {pos}", no)
        prev = positions.setdefault((pid, author), pos)
        if prev != pos:
            raise ValidationError(
                f"author {author!r} on paper {pid!r} has conflicting positions {prev} and {pos}", no
            )
        key = (pid, author, inst or None)
        if key in seen:
            dups += 1
            continue
        seen.add(key)
        records.append(AuthorshipRecord(pid, author, pos, inst or None))
    if dups:
        log.warning("collapsed %d duplicate authorship rows", dups)
    records.duplicates = dups
    return records


def _frozen(mapping):
    return MappingProxyType(dict(mapping))


class CorpusIndex:
    """Read-only indexed view of papers and authorships.

    Build it with :func:`build_index`. All query results are sorted by id.
    """

    __slots__ = (
        "_papers",
        "_by_paper",
        "_by_venue_year",
        "_by_author",
        "_by_institution",
        "_venues",
        "_years",
        "duplicates",
    )

    def __init__(self, papers, by_paper, duplicates=0):
        by_venue_year = defaultdict(list)
        for rec in papers.values():
            by_venue_year[(rec.venue_id, rec.year)].append(rec.paper_id)
        by_author = defaultdict(set)
        by_inst = defaultdict(list)
        for rows in by_paper.values():
            for a in rows:
                by_author[a.author_id].add(a.paper_id)
                if a.institution_id is not None:
                    by_inst[a.institution_id].append(a)
        object.__setattr__(self, "_papers", _frozen(sorted(papers.items())))
        object.__setattr__(self, "_by_paper", _frozen(sorted(by_paper.items())))
        object.__setattr__(
            self, "_by_venue_year", _frozen({k: tuple(sorted(v)) for k, v in by_venue_year.items()})
        )
        object.__setattr__(self, "_by_author", _frozen({k: tuple(sorted(v)) for k, v in by_author.items()}))
        object.__setattr__(
            self,
            "_by_institution",
            _frozen({k: tuple(sorted(v, key=AuthorshipRecord.sort_key)) for k, v in by_inst.items()}),
        )
        object.__setattr__(self, "_venues", tuple(sorted({r.venue_id for r in papers.values()})))
        years = [r.year for r in papers.values()]
        object.__setattr__(self, "_years", (min(years), max(years)) if years else None)
        object.__setattr__(self, "duplicates", duplicates)

    def __setattr__(self, name, value):
        raise AttributeError("CorpusIndex is immutable")

    @property
    def papers(self):
        return self._papers

    @property
    def venues(self):
        return self._venues

    @property
    def year_span(self):
        """``(first_year, last_year)`` of the corpus, or None when empty."""
        return self._years

    @property
    def institutions(self):
        return tuple(sorted(self._by_institution))

    @property
    def n_authorships(self):
        return sum(len(v) for v in self._by_paper.values())

    def venue_years(self):
        return tuple(sorted(self._by_venue_year))

    def authorships(self, paper_id):
        """Authorship rows of one paper sorted by (position, author, institution)."""
        return self._by_paper.get(paper_id, ())

    def papers_of_author(self, author_id):
        return self._by_author.get(author_id, ())

    def authorships_of_institution(self, institution_id):
        return self._by_institution.get(institution_id, ())

    def papers_of(self, venue_set, year_range, full_only=False):
        """Paper ids at ``venue_set`` within the inclusive ``year_range``."""
        lo, hi = year_range
        if isinstance(venue_set, str):
            venue_set = (venue_set,)
        out = []
        for venue in set(venue_set):
            for year in range(lo, hi + 1):
                ids = self._by_venue_year.get((venue, year), ())
                if full_only:
                    out.extend(p for p in ids if self._papers[p].is_full_paper)
                else:
                    out.extend(ids)
        out.sort()
        return out

    def iter_authorships(self):
        for rows in self._by_paper.values():
            yield from rows

    def __eq__(self, other):
        if not isinstance(other, CorpusIndex):
            return NotImplemented
        return dict(self._papers) == dict(other._papers) and set(self.iter_authorships()) == set(
            other.iter_authorships()
        )

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return (
            f"CorpusIndex(papers={len(self._papers)}, authorships={self.n_authorships}, "
            f"venues={len(self._venues)}, years={self._years})"
        )


def build_index(papers: Iterable[PaperRecord], authorships: Iterable[AuthorshipRecord]):
    """Validate parsed records and build a :class:`CorpusIndex`."""
    paper_map = {}
    for rec in papers:
        if not rec.paper_id:
            raise ValidationError("empty paper_id")
        if rec.paper_id in paper_map:
            raise DuplicateKeyError(f"duplicate paper_id {rec.paper_id!r}")
        if not 1900 <= rec.year <= 2100:
            raise ValidationError(f"paper {rec.paper_id!r}: year {rec.year} outside [1900, 2100]")
        paper_map[rec.paper_id] = rec

    by_paper = defaultdict(dict)
    positions = {}
    dups = getattr(authorships, "duplicates", 0)
    for a in authorships:
        if a.paper_id not in paper_map:
            raise ReferentialIntegrityError(a.paper_id)
        if a.position < 1:
            raise ValidationError(f"paper {a.paper_id!r}: author position must be >= 1")
        prev = positions.setdefault((a.paper_id, a.author_id), a.position)
        if prev != a.position:
            raise ValidationError(
                f"author {a.author_id!r} on paper {a.paper_id!r} has conflicting positions"
            )
        key = (a.author_id, a.institution_id)
        if key in by_paper[a.paper_id]:
            dups += 1
            continue
        by_paper[a.paper_id][key] = a
    rows = {
        pid: tuple(sorted(d.values(), key=AuthorshipRecord.sort_key)) for pid, d in by_paper.items()
    }
    return CorpusIndex(paper_map, rows, duplicates=dups)


def papers_of(index, venue_set, year_range, full_only=False):
    return index.papers_of(venue_set, year_range, full_only)


def load_corpus(papers_path, authorships_path):
    with open(papers_path, "rb") as fh:
        papers = parse_papers(fh, source=os.fspath(papers_path))
    with open(authorships_path, "rb") as fh:
        auths = parse_authorships(fh, source=os.fspath(authorships_path))
    return build_index(papers, auths)


def write_tsv(index, papers_path, authorships_path):
    """Serialise ``index`` back to the two input tables (with headers)."""
    with open(papers_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(PAPER_HEADER) + "\n")
        for rec in index.papers.values():
            fh.write(f"{rec.paper_id}\t{rec.venue_id}\t{rec.year}\t{int(rec.is_full_paper)}\n")
    with open(authorships_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(AUTHORSHIP_HEADER) + "\n")
        for a in index.iter_authorships():
            fh.write(f"{a.paper_id}\t{a.author_id}\t{a.position}\t{a.institution_id or ''}\n")


def save_index(index, path):
    payload = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "papers": [[r.paper_id, r.venue_id, r.year, int(r.is_full_paper)] for r in index.papers.values()],
        "authorships": [
            [a.paper_id, a.author_id, a.position, a.institution_id] for a in index.iter_authorships()
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))
        fh.write("\n")


def load_index(path):
    """Load an index cache written by :func:`save_index`, refusing other versions."""
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not an index cache ({exc.msg})", source=os.fspath(path)) from None
    if not isinstance(payload, dict) or payload.get("format") != CACHE_FORMAT:
        raise FormatVersionError(f"{path}: not an acceptrank index cache")
    if payload.get("version") != CACHE_VERSION:
        raise FormatVersionError(
            f"{path}: cache version {payload.get('version')!r}, expected {CACHE_VERSION}"
        )
    papers = [PaperRecord(p, v, int(y), bool(f)) for p, v, y, f in payload["papers"]]
    auths = [AuthorshipRecord(p, a, int(pos), inst) for p, a, pos, inst in payload["authorships"]]
    return build_index(papers, auths)
