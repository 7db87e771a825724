import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acceptrank.errors import ParseError, UndefinedMetricError
from acceptrank.evaluation import dcg_at, ideal_ranking, ndcg_at, read_ranking, read_truth

TRUTH = {"A": 3.0, "B": 2.0, "C": 1.0}


def test_hand_evaluated_case():
    want_dcg = 1 + 2 / math.log2(3) + 3 / 2
    want_idcg = 3 + 2 / math.log2(3) + 1 / 2
    assert dcg_at(["C", "B", "A"], TRUTH, 3) == pytest.approx(want_dcg, abs=1e-12)
    assert dcg_at(["C", "B", "A"], TRUTH, 3) == pytest.approx(3.76186, abs=1e-5)
    assert ndcg_at(["C", "B", "A"], TRUTH, 3) == pytest.approx(want_dcg / want_idcg, abs=1e-12)
    assert ndcg_at(["C", "B", "A"], TRUTH, 3) == pytest.approx(0.78999, abs=1e-4)


def test_trivial_cases():
    assert dcg_at(["A"], {"A": 1.0}, 1) == 1.0
    assert dcg_at(["X", "Y"], TRUTH, 5) == 0.0
    assert ndcg_at(["A", "B", "C"], TRUTH, 3) == 1.0
    assert ndcg_at([], TRUTH, 3) == 0.0


def test_cutoff_limits_the_sum():
    assert dcg_at(["C", "B", "A"], TRUTH, 1) == 1.0
    assert ndcg_at(["A", "C", "B"], TRUTH, 1) == 1.0


def test_argument_and_metric_errors():
    with pytest.raises(ValueError):
        dcg_at(["A"], TRUTH, 0)
    with pytest.raises(ValueError):
        dcg_at(["A", "A"], TRUTH, 2)
    with pytest.raises(UndefinedMetricError):
        ndcg_at(["A"], {"A": 0.0, "B": 0.0})
    with pytest.raises(ValueError):
        ndcg_at(["A"], {"A": -1.0})


def test_ideal_ties_by_id():
    assert ideal_ranking({"B": 1.0, "A": 1.0, "C": 2.0}) == ["C", "A", "B"]


truths = st.dictionaries(st.sampled_from("ABCDEF"), st.floats(0, 100, allow_nan=False), min_size=1)


@settings(max_examples=60, deadline=None)
@given(truths, st.integers(1, 6))
def test_ideal_is_exhaustive_maximum(truth, n):
    if max(truth.values()) <= 0:
        return
    best = max(dcg_at(list(p), truth, n) for p in itertools.permutations(truth))
    assert dcg_at(ideal_ranking(truth), truth, n) == pytest.approx(best, rel=1e-12, abs=1e-12)
    for p in itertools.permutations(truth):
        assert 0.0 <= ndcg_at(list(p), truth, n) <= 1.0 + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=2, max_size=8), st.data())
def test_adjacent_swap_increases_dcg(gains, data):
    ids = [f"I{i}" for i in range(len(gains))]
    truth = dict(zip(ids, gains))
    i = data.draw(st.integers(0, len(ids) - 2))
    if not gains[i] < gains[i + 1]:
        return
    swapped = ids[:i] + [ids[i + 1], ids[i]] + ids[i + 2:]
    assert dcg_at(swapped, truth, len(ids)) > dcg_at(ids, truth, len(ids))


@settings(max_examples=60, deadline=None)
@given(truths, st.floats(1e-3, 1e3), st.permutations("ABCDEF"))
def test_scale_invariance(truth, c, order):
    if max(truth.values()) <= 0:
        return
    scaled = {k: c * v for k, v in truth.items()}
    assert ndcg_at(list(order), scaled, 4) == pytest.approx(ndcg_at(list(order), truth, 4), rel=1e-9)


def test_file_readers(tmp_path):
    pred = tmp_path / "pred.tsv"
    pred.write_text("rank\tinstitution_id\n2\tB\n1\tC\n3\tA\n")
    truth = tmp_path / "truth.tsv"
    truth.write_text("institution_id\tscore\nA\t3\nB\t2\nC\t1\n")
    assert read_ranking(pred) == ["C", "B", "A"]
    assert read_truth(truth) == TRUTH
    truth.write_text("institution_id\tscore\nA\tlots\n")
    with pytest.raises(ParseError) as exc:
        read_truth(truth)
    assert exc.value.line == 2
    pred.write_text("first\tA\n")
    with pytest.raises(ParseError):
        read_ranking(pred)
