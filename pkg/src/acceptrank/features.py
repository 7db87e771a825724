"""Per institution-conference-year statistics and the 144-column feature matrix.

Column order is a contract: setting-major, then year window, then the six
basic features, named ``<setting>.<window>.<feature>`` with 1-based indices.

Settings: 1 target (full papers), 2 target (all), 3-5 each similar venue
(all), 6 union of the four venues (all). Windows for target year ``t``:
``t-1``, ``t-2``, ``t-3`` and the aggregate ``t-3..t-1``.
"""

import warnings
from collections import defaultdict
from dataclasses import astuple, dataclass, fields
from typing import Dict, Tuple

import numpy as np

from .scoring import institution_scores, score_papers


@dataclass(frozen=True)
class BasicFeatures:
    n_paper: int = 0
    n_author: int = 0
    n_author_paper: int = 0
    n_first_author: int = 0
    n_second_author: int = 0
    score: float = 0.0

    def as_tuple(self):
        return astuple(self)


FEATURE_NAMES = tuple(f.name for f in fields(BasicFeatures))
N_SETTINGS = 6
N_WINDOWS = 4
N_COLUMNS = N_SETTINGS * N_WINDOWS * len(FEATURE_NAMES)


def column_names():
    return tuple(
        f"{s}.{w}.{name}"
        for s in range(1, N_SETTINGS + 1)
        for w in range(1, N_WINDOWS + 1)
        for name in FEATURE_NAMES
    )


def column_index(setting, window, feature):
    """0-based column of (1-based setting, 1-based window, feature name)."""
    return ((setting - 1) * N_WINDOWS + (window - 1)) * len(FEATURE_NAMES) + FEATURE_NAMES.index(feature)


def year_windows(target_year):
    t = int(target_year)
    return ((t - 1, t - 1), (t - 2, t - 2), (t - 3, t - 3), (t - 3, t - 1))


@dataclass(frozen=True)
class FeatureSpec:
    target_venue: str
    similar_venues: Tuple[str, str, str]
    target_year: int

    def __post_init__(self):
        sims = tuple(self.similar_venues)
        if len(sims) != 3:
            raise ValueError(f"exactly 3 similar venues are required, got {len(sims)}")
        if self.target_venue in sims:
            raise ValueError("the target venue cannot be one of its own similar venues")
        object.__setattr__(self, "similar_venues", sims)

    def conference_settings(self):
        """``(venue_set, full_only)`` for the six settings, in column order."""
        t = self.target_venue
        s1, s2, s3 = self.similar_venues
        return (
            ((t,), True),
            ((t,), False),
            ((s1,), False),
            ((s2,), False),
            ((s3,), False),
            ((t, s1, s2, s3), False),
        )

    def year_settings(self):
        return year_windows(self.target_year)

    def scopes(self):
        for venues, full_only in self.conference_settings():
            for window in self.year_settings():
                yield venues, window, full_only


@dataclass(frozen=True)
class FeatureMatrix:
    spec: FeatureSpec
    institutions: Tuple[str, ...]
    values: np.ndarray

    @property
    def columns(self):
        return column_names()

    def row(self, institution_id):
        return self.values[self.institutions.index(institution_id)]

    def to_tsv(self):
        lines = ["\t".join(("institution_id",) + self.columns)]
        for inst, row in zip(self.institutions, self.values):
            lines.append(inst + "\t" + "\t".join(f"{v:.6f}" for v in row))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LabelVector:
    target_venue: str
    target_year: int
    labels: Dict[str, float]


def scope_features(index, venue_set, year_range, full_only):
    """:class:`BasicFeatures` for every institution active in one scope."""
    if isinstance(venue_set, str):
        venue_set = (venue_set,)
    pids = index.papers_of(venue_set, year_range, full_only)
    papers = defaultdict(set)
    authors = defaultdict(set)
    pairs = defaultdict(set)
    first = defaultdict(set)
    second = defaultdict(set)
    for pid in pids:
        for a in index.authorships(pid):
            inst = a.institution_id
            if inst is None:
                continue
            papers[inst].add(pid)
            authors[inst].add(a.author_id)
            pairs[inst].add((a.author_id, pid))
            if a.position == 1:
                first[inst].add(pid)
            elif a.position == 2:
                second[inst].add(pid)
    scores = score_papers(index, pids)
    return {
        inst: BasicFeatures(
            len(papers[inst]),
            len(authors[inst]),
            len(pairs[inst]),
            len(first[inst]),
            len(second[inst]),
            scores.get(inst, 0.0),
        )
        for inst in sorted(papers)
    }


def basic_features(index, institution, venue_set, year_range, full_only):
    return scope_features(index, venue_set, year_range, full_only).get(institution, BasicFeatures())


def assemble_matrix(index, spec, labels=None, extra_institutions=()):
    """Build the institution x 144 matrix for ``spec``.

    Rows are institutions with any nonzero column, plus institutions in
    ``labels`` or ``extra_institutions`` (which may be all-zero rows).
    """
    span = index.year_span
    if span is not None and spec.target_year - 3 < span[0]:
        warnings.warn(
            f"target year {spec.target_year}: window starts before first corpus year {span[0]}; "
            "missing years are zero-filled",
            stacklevel=2,
        )
    nf = len(FEATURE_NAMES)
    blocks = []
    active = set()
    for venues, window, full_only in spec.scopes():
        table = scope_features(index, venues, window, full_only)
        active.update(table)
        blocks.append(table)
    rows = set(active)
    if labels is not None:
        rows.update(labels.labels if isinstance(labels, LabelVector) else labels)
    rows.update(extra_institutions)
    institutions = tuple(sorted(rows))
    pos = {inst: i for i, inst in enumerate(institutions)}
    values = np.zeros((len(institutions), N_COLUMNS), dtype=np.float64)
    for b, table in enumerate(blocks):
        for inst, feats in table.items():
            values[pos[inst], b * nf:(b + 1) * nf] = feats.as_tuple()
    return FeatureMatrix(spec, institutions, values)


def target_scores(index, venue, year):
    table = institution_scores(index, (venue,), (year, year), full_only=True)
    return LabelVector(venue, int(year), dict(table.scores))


def read_header(line):
    """Inverse of the TSV header: list of ``(setting, window, feature)``."""
    names = line.rstrip("\n").split("\t")
    if names[0] != "institution_id":
        raise ValueError("feature header must start with institution_id")
    out = []
    for name in names[1:]:
        s, w, feat = name.split(".", 2)
        out.append((int(s), int(w), feat))
    return out
