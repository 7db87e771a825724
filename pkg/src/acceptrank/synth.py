"""Seeded synthetic corpora with planted venue overlap and productivity trends.

Venue ``CONF0`` is the target. Every venue draws its authors from a
community; venue ``j`` shares ``overlaps[j-1]`` of the target community. An
author's chance of appearing on a paper is proportional to the yearly
productivity of the author's home institution.
"""

import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import AuthorshipRecord, PaperRecord, build_index, write_tsv
from .scoring import format_scores, institution_scores

TRENDS = ("constant", "rising", "declining")


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n_institutions: int = 50
    n_venues: int = 6
    n_authors: int = 600
    n_years: int = 8
    start_year: int = 2008
    papers_per_venue_year: int = 40
    max_authors: int = 4
    growth: float = 0.15
    # per-institution trend names; random when None
    trends: Optional[Sequence[str]] = None
    # per-institution base productivity; lognormal when None
    productivity: Optional[Sequence[float]] = None
    # share of the target community present in venues 1..n_venues-1
    overlaps: Optional[Sequence[float]] = None
    full_fraction: float = 0.8
    multi_affiliation: float = 0.1
    unknown_affiliation: float = 0.05
    time_constant: bool = False

    def __post_init__(self):
        for name in ("n_institutions", "n_venues", "n_authors", "n_years", "papers_per_venue_year", "max_authors"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.trends is not None:
            if len(self.trends) != self.n_institutions:
                raise ValueError("trends needs one entry per institution")
            bad = set(self.trends) - set(TRENDS)
            if bad:
                raise ValueError(f"unknown trends {sorted(bad)}")
        if self.productivity is not None:
            if len(self.productivity) != self.n_institutions or min(self.productivity) < 0:
                raise ValueError("productivity needs one non-negative entry per institution")
        if self.overlaps is not None and len(self.overlaps) != self.n_venues - 1:
            raise ValueError("overlaps needs one entry per non-target venue")

    @property
    def years(self):
        return list(range(self.start_year, self.start_year + self.n_years))

    def venue_ids(self):
        return [f"CONF{j}" for j in range(self.n_venues)]

    def institution_ids(self):
        return [f"I{i:03d}" for i in range(self.n_institutions)]


def _default_overlaps(n):
    base = [0.8, 0.5, 0.35, 0.2, 0.1]
    return [base[j] if j < len(base) else 0.05 for j in range(n)]


def _communities(spec, rng):
    m = max(1, spec.n_authors // 3)
    perm = rng.permutation(spec.n_authors)
    target = perm[:m]
    outside = perm[m:]
    overlaps = spec.overlaps if spec.overlaps is not None else _default_overlaps(spec.n_venues - 1)
    comms = [np.sort(target)]
    for f in overlaps:
        n_in = int(round(f * m))
        n_out = min(m - n_in, outside.size)
        inside = rng.choice(target, size=n_in, replace=False)
        other = rng.choice(outside, size=n_out, replace=False) if n_out > 0 else outside[:0]
        comms.append(np.sort(np.concatenate([inside, other])))
    return comms


def _productivity(spec, rng):
    n = spec.n_institutions
    base = (np.asarray(spec.productivity, dtype=float) if spec.productivity is not None
            else rng.lognormal(0.0, 0.75, size=n))
    trends = list(spec.trends) if spec.trends is not None else [TRENDS[i] for i in rng.integers(0, 3, size=n)]
    rate = np.empty((spec.n_years, n))
    for y in range(spec.n_years):
        for i, trend in enumerate(trends):
            if trend == "rising":
                factor = (1 + spec.growth) ** y
            elif trend == "declining":
                factor = (1 + spec.growth) ** (-y)
            else:
                factor = 1.0
            rate[y, i] = base[i] * factor
    return rate


def _draw_papers(spec, rng, comms, home, rate_row, venue, year, tag):
    papers, auths = [], []
    n_inst = spec.n_institutions
    inst_ids = spec.institution_ids()
    count = rng.poisson(spec.papers_per_venue_year)
    for k in range(count):
        members = comms[venue]
        weights = rate_row[home[members]]
        live = members[weights > 0]
        if live.size == 0:
            break
        p = weights[weights > 0] / weights[weights > 0].sum()
        n_auth = min(int(rng.integers(1, spec.max_authors + 1)), live.size)
        chosen = rng.choice(live, size=n_auth, replace=False, p=p)
        pid = f"P{tag}_{venue}_{k:04d}"
        papers.append(PaperRecord(pid, f"CONF{venue}", year, bool(rng.random() < spec.full_fraction)))
        for pos, author in enumerate(chosen, start=1):
            aid = f"A{author:05d}"
            u = rng.random()
            if u < spec.unknown_affiliation:
                auths.append(AuthorshipRecord(pid, aid, pos, None))
                continue
            auths.append(AuthorshipRecord(pid, aid, pos, inst_ids[home[author]]))
            if u < spec.unknown_affiliation + spec.multi_affiliation and n_inst > 1:
                w = rate_row.copy()
                w[home[author]] = 0.0
                if w.sum() > 0:
                    second = int(rng.choice(n_inst, p=w / w.sum()))
                    auths.append(AuthorshipRecord(pid, aid, pos, inst_ids[second]))
    return papers, auths


def generate_records(spec: SynthSpec):
    """Return ``(papers, authorships)`` record lists for ``spec``."""
    rng = np.random.default_rng(spec.seed)
    comms = _communities(spec, rng)
    home = rng.integers(0, spec.n_institutions, size=spec.n_authors)
    rate = _productivity(spec, rng)
    papers, auths = [], []
    for y, year in enumerate(spec.years):
        for v in range(spec.n_venues):
            if spec.time_constant and y > 0:
                continue
            p, a = _draw_papers(spec, rng, comms, home, rate[y], v, year, str(year))
            papers += p
            auths += a
    if spec.time_constant:
        first = list(papers)
        first_auths = list(auths)
        for year in spec.years[1:]:
            rename = {}
            for rec in first:
                new = f"P{year}" + rec.paper_id[len(f"P{spec.start_year}"):]
                rename[rec.paper_id] = new
                papers.append(PaperRecord(new, rec.venue_id, year, rec.is_full_paper))
            for a in first_auths:
                auths.append(AuthorshipRecord(rename[a.paper_id], a.author_id, a.position, a.institution_id))
    return papers, auths


def generate_synthetic(spec: SynthSpec, out_dir):
    """Write ``papers.tsv``, ``authorships.tsv`` and ``truth/<venue>_<year>.tsv``.

    Truth tables are full-paper Institution Ranking Scores. Returns the index.
    """
    papers, auths = generate_records(spec)
    index = build_index(papers, auths)
    os.makedirs(out_dir, exist_ok=True)
    write_tsv(index, os.path.join(out_dir, "papers.tsv"), os.path.join(out_dir, "authorships.tsv"))
    truth_dir = os.path.join(out_dir, "truth")
    os.makedirs(truth_dir, exist_ok=True)
    for venue in spec.venue_ids():
        for year in spec.years:
            table = institution_scores(index, (venue,), (year, year), full_only=True)
            with open(os.path.join(truth_dir, f"{venue}_{year}.tsv"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(format_scores(table, digits=12))
    return index
