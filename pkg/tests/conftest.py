import pytest

from acceptrank.corpus import AuthorshipRecord, PaperRecord, build_index


def make_index(papers, authorships):
    """Index from ``(pid, venue, year, full)`` and ``(pid, author, pos, inst)`` tuples."""
    return build_index(
        [PaperRecord(p, v, y, bool(f)) for p, v, y, f in papers],
        [AuthorshipRecord(p, a, pos, inst) for p, a, pos, inst in authorships],
    )


@pytest.fixture
def kdd_fixture():
    # X: paper1 (u1@X pos1, u2@Z pos2), paper2 (u3@X pos1); both KDD-2014 full
    return make_index(
        [("p1", "KDD", 2014, 1), ("p2", "KDD", 2014, 1)],
        [("p1", "u1", 1, "X"), ("p1", "u2", 2, "Z"), ("p2", "u3", 1, "X")],
    )


@pytest.fixture
def split_fixture():
    # u1@{X,Y}, u2@{X}
    return make_index(
        [("p1", "KDD", 2014, 1)],
        [("p1", "u1", 1, "X"), ("p1", "u1", 1, "Y"), ("p1", "u2", 2, "X")],
    )
