"""Similar-conference discovery from author/venue co-occurrence."""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .errors import EmptyMatrixError

METHODS = ("cosine", "column_sum")
DEFAULT_CUTOFF = 2010


@dataclass(frozen=True)
class AuthorVenueMatrix:
    """Binary matrix over the authors of one target venue.

    ``entries[i, j] == 1`` iff ``row_authors[i]`` published at
    ``col_venues[j]`` within the year window.
    """

    target_venue: str
    row_authors: Tuple[str, ...]
    col_venues: Tuple[str, ...]
    entries: np.ndarray
    year_range: Tuple[int, int]

    @property
    def target_col(self):
        return self.col_venues.index(self.target_venue)

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class SimilarityRanking:
    target_venue: str
    method: str
    ranked: Tuple[Tuple[str, float], ...]

    def venues(self):
        return [v for v, _ in self.ranked]


class TopSimilar(NamedTuple):
    venues: list
    shortfall: bool


def build_author_venue_matrix(index, target_venue, cutoff_year=DEFAULT_CUTOFF, until_year: Optional[int] = None):
    """Author/venue matrix for ``target_venue`` using all papers from ``cutoff_year``.

    ``until_year`` caps the window (inclusive). The default uses every later year.
    """
    span = index.year_span
    hi = until_year if until_year is not None else (span[1] if span else cutoff_year)
    window = (int(cutoff_year), int(hi))
    target_papers = index.papers_of((target_venue,), window, full_only=False)
    authors = sorted({a.author_id for pid in target_papers for a in index.authorships(pid)})
    if not authors:
        raise EmptyMatrixError(
            f"venue {target_venue!r} has no authored papers in years {window[0]}-{window[1]}"
        )
    lo, hi = window
    cells = set()
    for i, author in enumerate(authors):
        for pid in index.papers_of_author(author):
            rec = index.papers[pid]
            if lo <= rec.year <= hi:
                cells.add((i, rec.venue_id))
    venues = tuple(sorted({v for _, v in cells}))
    col = {v: j for j, v in enumerate(venues)}
    entries = np.zeros((len(authors), len(venues)), dtype=np.uint8)
    for i, v in cells:
        entries[i, col[v]] = 1
    return AuthorVenueMatrix(target_venue, tuple(authors), venues, entries, window)


def _ranking(matrix, method, scores):
    t = matrix.target_col
    items = [(v, s) for j, (v, s) in enumerate(zip(matrix.col_venues, scores)) if j != t and s is not None]
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    return SimilarityRanking(matrix.target_venue, method, tuple(items))


def cosine_similarity_ranking(matrix):
    a = matrix.entries.astype(np.float64)
    colsum = a.sum(axis=0)
    keep = colsum > 0
    normed = np.zeros_like(a)
    normed[:, keep] = a[:, keep] / colsum[keep]
    norms = np.sqrt((normed * normed).sum(axis=0))
    target = normed[:, matrix.target_col]
    dots = target @ normed
    scores = [None] * a.shape[1]
    for j in np.flatnonzero(keep):
        scores[j] = float(min(1.0, max(0.0, dots[j] / (norms[j] * norms[matrix.target_col]))))
    return _ranking(matrix, "cosine", scores)


def column_sum_ranking(matrix):
    sums = matrix.entries.sum(axis=0, dtype=np.int64)
    return _ranking(matrix, "column_sum", [int(s) for s in sums])


def similarity_ranking(matrix, method="cosine"):
    if method in ("colsum", "column_sum"):
        return column_sum_ranking(matrix)
    if method == "cosine":
        return cosine_similarity_ranking(matrix)
    raise ValueError(f"unknown similarity method {method!r}")


def top_similar(ranking, k=3):
    if k < 1:
        raise ValueError("k must be >= 1")
    venues = ranking.venues()
    return TopSimilar(venues[:k], len(venues) < k)


def find_similar(index, target_venue, k=3, method="cosine", cutoff_year=DEFAULT_CUTOFF, until_year=None):
    matrix = build_author_venue_matrix(index, target_venue, cutoff_year, until_year)
    return top_similar(similarity_ranking(matrix, method), k)
