import random

import numpy as np
import pytest

from acceptrank.corpus import AuthorshipRecord, PaperRecord, build_index
from acceptrank.features import (
    FEATURE_NAMES,
    N_COLUMNS,
    BasicFeatures,
    FeatureSpec,
    assemble_matrix,
    basic_features,
    column_index,
    column_names,
    read_header,
    target_scores,
)
from acceptrank.scoring import institution_scores

from .conftest import make_index

SPEC = FeatureSpec("KDD", ("ICDM", "CIKM", "WWW"), 2015)


def test_hand_counted_fixture(kdd_fixture):
    got = basic_features(kdd_fixture, "X", {"KDD"}, (2014, 2014), True)
    assert got == BasicFeatures(2, 2, 2, 2, 0, 1.5)
    assert basic_features(kdd_fixture, "Z", {"KDD"}, (2014, 2014), True) == BasicFeatures(1, 1, 1, 0, 1, 0.5)


def test_absent_institution_is_all_zero(kdd_fixture):
    assert basic_features(kdd_fixture, "Q", {"KDD"}, (2014, 2014), True).as_tuple() == (0, 0, 0, 0, 0, 0.0)
    assert basic_features(kdd_fixture, "X", {"KDD"}, (2010, 2011), True) == BasicFeatures()


def test_single_author_paper_has_no_second_author():
    idx = make_index([("p1", "KDD", 2014, 1)], [("p1", "u1", 1, "X")])
    assert basic_features(idx, "X", {"KDD"}, (2014, 2014), True).n_second_author == 0


def test_column_contract():
    names = column_names()
    assert len(names) == N_COLUMNS == 144
    assert names[0] == "1.1.n_paper"
    assert names[5] == "1.1.score"
    assert names[6] == "1.2.n_paper"
    assert names[-1] == "6.4.score"
    for s in range(1, 7):
        for w in range(1, 5):
            for f in FEATURE_NAMES:
                assert names[column_index(s, w, f)] == f"{s}.{w}.{f}"


def test_spec_requires_three_similar():
    with pytest.raises(ValueError):
        FeatureSpec("KDD", ("ICDM", "CIKM"), 2015)
    with pytest.raises(ValueError):
        FeatureSpec("KDD", ("ICDM", "CIKM", "KDD"), 2015)


@pytest.mark.filterwarnings("ignore:target year")
def test_empty_corpus_gives_no_rows():
    idx = make_index([("p1", "OTHER", 2014, 1)], [("p1", "u1", 1, "X")])
    m = assemble_matrix(idx, SPEC)
    assert m.values.shape == (0, 144)


def test_single_window_activity_hits_expected_columns():
    idx = make_index(
        [("p0", "OTHER", 2012, 1), ("p1", "KDD", 2014, 1)],
        [("p0", "u9", 1, "Q"), ("p1", "u1", 1, "X"), ("p1", "u2", 2, "X")],
    )
    m = assemble_matrix(idx, SPEC)
    row = m.row("X")
    expected = {column_index(s, w, f) for s in (1, 2, 6) for w in (1, 4) for f in FEATURE_NAMES}
    assert set(np.flatnonzero(row)) == expected
    # union setting mirrors the target-all setting
    for w in range(1, 5):
        for f in FEATURE_NAMES:
            assert row[column_index(6, w, f)] == row[column_index(2, w, f)]
    # the 24-dim target block appears twice (full only and all)
    assert np.array_equal(row[:24], row[24:48])
    assert "Q" not in m.institutions


def test_aggregate_window_distinct_authors():
    # u1 publishes in each of the three years: yearly n_author sums to 3, aggregate is 1
    papers = [(f"p{y}", "KDD", y, 1) for y in (2012, 2013, 2014)]
    auths = [(f"p{y}", "u1", 1, "X") for y in (2012, 2013, 2014)]
    row = assemble_matrix(make_index(papers, auths), SPEC).row("X")
    yearly = [row[column_index(2, w, "n_author")] for w in (1, 2, 3)]
    assert yearly == [1, 1, 1]
    assert row[column_index(2, 4, "n_author")] == 1
    assert row[column_index(2, 4, "n_paper")] == 3
    assert row[column_index(2, 4, "score")] == pytest.approx(3.0)


def random_records(rng, n=40):
    papers, auths = [], []
    for i in range(n):
        pid = f"p{i}"
        papers.append(PaperRecord(pid, rng.choice(["KDD", "ICDM", "CIKM", "WWW", "AAAI"]),
                                  rng.randint(2011, 2014), rng.random() < 0.6))
        for pos in range(1, rng.randint(1, 4) + 1):
            for inst in rng.sample(["A", "B", "C", "D"], rng.randint(1, 2)):
                auths.append(AuthorshipRecord(pid, f"u{rng.randrange(12)}", pos, inst))
    # resolve conflicting positions for the same author by keeping the first
    seen, clean = {}, []
    for a in auths:
        key = (a.paper_id, a.author_id)
        if seen.setdefault(key, a.position) == a.position:
            clean.append(a)
    return papers, clean


@pytest.mark.parametrize("seed", range(8))
def test_score_columns_match_scoring_module(seed):
    idx = build_index(*random_records(random.Random(seed)))
    m = assemble_matrix(idx, SPEC)
    for b, (venues, window, full_only) in enumerate(SPEC.scopes()):
        table = institution_scores(idx, venues, window, full_only).scores
        s, w = divmod(b, 4)
        col = column_index(s + 1, w + 1, "score")
        for inst, row in zip(m.institutions, m.values):
            assert row[col] == pytest.approx(table.get(inst, 0.0), abs=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_invariants_and_monotonicity(seed):
    rng = random.Random(seed)
    papers, auths = random_records(rng)
    m = assemble_matrix(build_index(papers, auths), SPEC)
    assert np.isfinite(m.values).all() and (m.values >= 0).all()
    assert list(m.institutions) == sorted(m.institutions)
    for s in range(1, 7):
        for w in range(1, 5):
            c = {f: m.values[:, column_index(s, w, f)] for f in FEATURE_NAMES}
            assert (c["n_author"] <= c["n_author_paper"]).all()
            assert (c["n_first_author"] <= c["n_paper"]).all()
            assert (c["n_second_author"] <= c["n_paper"]).all()
            assert (c["score"] <= c["n_paper"] + 1e-12).all()
            for f in FEATURE_NAMES[:5]:
                assert np.array_equal(c[f], np.round(c[f]))
    extra = PaperRecord("new", "KDD", 2014, True)
    grown = assemble_matrix(build_index(papers + [extra], auths + [AuthorshipRecord("new", "u0", 1, "A")]), SPEC)
    count_cols = [i for i, n in enumerate(column_names()) if not n.endswith("score")]
    for inst, row in zip(m.institutions, m.values):
        assert (grown.row(inst)[count_cols] >= row[count_cols]).all()


@pytest.mark.filterwarnings("ignore:target year")
def test_header_round_trip_golden():
    idx = make_index([("p1", "KDD", 2014, 1)], [("p1", "u1", 1, "X")])
    text = assemble_matrix(idx, SPEC).to_tsv()
    header, line = text.splitlines()
    parsed = read_header(header)
    assert parsed[:7] == [(1, 1, "n_paper"), (1, 1, "n_author"), (1, 1, "n_author_paper"),
                          (1, 1, "n_first_author"), (1, 1, "n_second_author"), (1, 1, "score"),
                          (1, 2, "n_paper")]
    assert [column_index(*p) for p in parsed] == list(range(144))
    assert line.split("\t")[:7] == ["X", "1.000000", "1.000000", "1.000000", "1.000000", "0.000000", "1.000000"]


def test_labels_and_extra_rows(split_fixture):
    labels = target_scores(split_fixture, "KDD", 2014)
    assert labels.labels == {"X": 0.75, "Y": 0.25}
    assert target_scores(split_fixture, "KDD", 2013).labels == {}
    spec = FeatureSpec("KDD", ("A", "B", "C"), 2018)
    m = assemble_matrix(split_fixture, spec, labels=labels, extra_institutions=["Q"])
    assert m.institutions == ("Q", "X", "Y")
    assert not m.values.any()


def test_early_target_year_warns(kdd_fixture):
    with pytest.warns(UserWarning):
        assemble_matrix(kdd_fixture, FeatureSpec("KDD", ("A", "B", "C"), 2015))
