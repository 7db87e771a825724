"""NDCG@n with linear gains and ``log2(rank + 1)`` discounts."""

import math
from typing import Mapping, Sequence

from .errors import ParseError, UndefinedMetricError

DEFAULT_N = 20


def _discount(rank):
    return math.log2(rank + 1)


def dcg_at(ranked: Sequence[str], truth: Mapping[str, float], n=DEFAULT_N):
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(set(ranked)) != len(ranked):
        raise ValueError("ranked list contains duplicates")
    total = 0.0
    for i, inst in enumerate(ranked[:n], start=1):
        total += truth.get(inst, 0.0) / _discount(i)
    return total


def ideal_ranking(truth: Mapping[str, float]):
    return [k for k, _ in sorted(truth.items(), key=lambda kv: (-kv[1], kv[0]))]


def ndcg_at(ranked: Sequence[str], truth: Mapping[str, float], n=DEFAULT_N):
    if any(v < 0 for v in truth.values()):
        raise ValueError("truth scores must be non-negative")
    idcg = dcg_at(ideal_ranking(truth), truth, n)
    if idcg <= 0.0:
        raise UndefinedMetricError("NDCG is undefined when every truth score is zero")
    return dcg_at(ranked, truth, n) / idcg


def read_ranking(path):
    """Read ``rank<TAB>institution_id[<TAB>score]`` (header optional), ordered by rank."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t")
            if not line.strip() or (no == 1 and parts[0] == "rank"):
                continue
            try:
                rows.append((int(parts[0]), parts[1]))
            except (ValueError, IndexError):
                raise ParseError("expected rank<TAB>institution_id", line=no, source=str(path)) from None
    rows.sort()
    return [inst for _, inst in rows]


def read_truth(path):
    truth = {}
    with open(path, encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split("\t")
            if not line.strip() or (no == 1 and parts[0] == "institution_id"):
                continue
            try:
                truth[parts[0]] = float(parts[1])
            except (ValueError, IndexError):
                raise ParseError("expected institution_id<TAB>score", line=no, source=str(path)) from None
    return truth
