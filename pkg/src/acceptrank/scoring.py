"""Institution Ranking Score (fractional counting).

Every selected paper carries one vote, split evenly over its distinct
authors; each author's share is split evenly over that author's distinct
known institutions on the paper. Shares of authors with no known affiliation
are dropped.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple


@dataclass(frozen=True)
class ScoreTable:
    venue_set: FrozenSet[str]
    year_range: Tuple[int, int]
    full_only: bool
    scores: Dict[str, float] = field(default_factory=dict)

    def get(self, institution_id, default=0.0):
        return self.scores.get(institution_id, default)

    def __len__(self):
        return len(self.scores)

    def ranked(self):
        """``(institution_id, score)`` by descending score, ties by id."""
        return sorted(self.scores.items(), key=lambda kv: (-kv[1], kv[0]))


def _check_range(year_range):
    lo, hi = year_range
    if hi < lo:
        raise ValueError(f"empty year range [{lo}, {hi}]")
    return int(lo), int(hi)


def paper_shares(authorships):
    """Yield ``(institution_id, share)`` for one paper in fixed summation order."""
    by_author = {}
    for a in authorships:  # rows arrive sorted by (position, author, institution)
        insts = by_author.setdefault(a.author_id, [])
        if a.institution_id is not None and a.institution_id not in insts:
            insts.append(a.institution_id)
    n = len(by_author)
    for insts in by_author.values():
        if not insts:
            continue
        share = 1.0 / (n * len(insts))
        for inst in sorted(insts):
            yield inst, share


def score_papers(index, paper_ids):
    """Sum shares over ``paper_ids`` (already sorted) into a dict."""
    acc = defaultdict(float)
    for pid in paper_ids:
        for inst, share in paper_shares(index.authorships(pid)):
            acc[inst] += share
    return {k: v for k, v in sorted(acc.items()) if v > 0.0}


def institution_scores(index, venue_set, year_range, full_only=True):
    if isinstance(venue_set, str):
        venue_set = (venue_set,)
    lo, hi = _check_range(year_range)
    pids = index.papers_of(venue_set, (lo, hi), full_only)
    return ScoreTable(frozenset(venue_set), (lo, hi), bool(full_only), score_papers(index, pids))


def format_scores(table, digits=6):
    lines = ["institution_id\tscore"]
    lines += [f"{inst}\t{score:.{digits}f}" for inst, score in table.ranked()]
    return "\n".join(lines) + "\n"
