import gzip
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semrec.errors import ParseError, ValidationError
from semrec.ingest import (
    ConceptCatalog,
    RatingRecord,
    RatingScale,
    RatingsStore,
    parse_concepts,
    parse_ratings,
    validate,
    write_concepts,
    write_ratings,
)


def test_empty_stream():
    store = parse_ratings(b"")
    assert len(store) == 0
    assert store.users == [] and store.items == []


def test_user_mean():
    store = parse_ratings(b"u1,i1,1,5\nu1,i2,1,3\n")
    assert store.mean("u1", 1) == 4.0


def test_fixture_duplicate_count(data_dir):
    store = parse_ratings(data_dir / "ratings_10.csv")
    assert len(store) == 9
    assert store.duplicates == 1
    assert store.rating("u2", "i1", 3) == 5.0


def test_header_and_comments_optional():
    text = "# a comment\nuser,item,attribute,score\n\nu1,i1,3,4\n"
    assert len(parse_ratings(io.StringIO(text))) == 1
    assert len(parse_ratings(b"u1,i1,3,4\n")) == 1


@pytest.mark.parametrize(
    "line, exc",
    [
        ("u1,i1,3", ParseError),
        ("u1,i1,3,4,9", ParseError),
        ("u1,i1,3,four", ParseError),
        ("u1,i1,x,4", ParseError),
        ("u1,i1,3,6", ValidationError),
        ("u1,i1,3,0", ValidationError),
        ("u1,i1,3,3.5", ValidationError),
        ("u1,i1,4,3", ValidationError),
        ("u1,i1,0,3", ValidationError),
    ],
)
def test_bad_lines_are_line_addressed(line, exc):
    text = "user,item,attribute,score\nu0,i0,1,1\n" + line + "\n"
    with pytest.raises(exc) as info:
        parse_ratings(text.encode())
    assert info.value.line == 3
    assert "line 3" in str(info.value)


def test_real_valued_scale():
    store = parse_ratings(b"u1,i1,1,0.25\n", scale=RatingScale(0, 1, integral=False), n_attributes=1)
    assert store.rating("u1", "i1", 1) == 0.25


def test_gzip_path(tmp_path):
    path = tmp_path / "r.csv.gz"
    with gzip.open(path, "wt") as fh:
        fh.write("user,item,attribute,score\nu1,i1,3,4\n")
    assert len(parse_ratings(path)) == 1
    with pytest.raises(ValidationError) as info:
        raw = tmp_path / "bad.csv.gz"
        with gzip.open(raw, "wt") as fh:
            fh.write("u1,i1,3,9\n")
        parse_ratings(raw)
    assert "bad.csv.gz" in str(info.value)


def test_concepts_dedup():
    cat = parse_concepts(b"i1,c1\ni1,c1\ni1,c2\n")
    assert cat["i1"] == {"c1", "c2"}
    assert len(cat["i1"]) == 2


def test_concepts_empty():
    assert len(parse_concepts(b"")) == 0


def test_concepts_fixture(data_dir):
    cat = parse_concepts(data_dir / "concepts_6.csv")
    assert len(cat) == 3
    assert sorted(len(cat[i]) for i in cat.items) == [1, 2, 3]


def test_concepts_malformed():
    with pytest.raises(ParseError) as info:
        parse_concepts(b"item,concept\ni1,c1\ni2\n")
    assert info.value.line == 3


def test_validate_consistent(data_dir):
    store = parse_ratings(b"u1,i1,1,5\nu1,i2,1,3\nu2,i1,1,2\nu2,i2,1,4\n", n_attributes=1)
    cat = ConceptCatalog({"i1": {"a"}, "i2": {"b"}})
    report = validate(store, cat)
    assert report.unannotated_items == []
    assert report.zero_variance_users == {1: []}
    assert report.ok


def test_validate_unannotated_item():
    store = parse_ratings(b"u1,i1,1,5\nu1,i9,1,3\n", n_attributes=1)
    report = validate(store, ConceptCatalog({"i1": {"a"}}))
    assert report.unannotated_items == ["i9"]


def test_validate_zero_variance_user():
    store = parse_ratings(b"u1,i1,1,4\nu1,i2,1,4\nu1,i3,1,4\nu2,i1,1,1\nu2,i2,1,5\n")
    cat = ConceptCatalog({"i1": {"a"}, "i2": {"a"}, "i3": {"a"}})
    report = validate(store, cat)
    assert report.zero_variance_users[1] == ["u1"]
    before = store.records()
    validate(store, cat)
    assert store.records() == before


records_st = st.lists(
    st.builds(
        RatingRecord,
        user=st.sampled_from(["u1", "u2", "u3", "a,b", 'q"t']),
        item=st.sampled_from(["i1", "i2", "i3", "i4"]),
        attribute=st.integers(1, 3),
        score=st.integers(1, 5).map(float),
    ),
    max_size=40,
)


@given(records_st)
@settings(max_examples=60, deadline=None)
def test_round_trip(records):
    store = RatingsStore(records)
    buf = io.StringIO()
    write_ratings(store, buf)
    again = parse_ratings(io.StringIO(buf.getvalue()))
    assert again.same_records(store)


@given(records_st)
@settings(max_examples=60, deadline=None)
def test_store_invariants(records):
    store = RatingsStore(records)
    for r in store:
        assert r in store.by_user(r.user)
        assert r in store.by_item(r.item)
    by_user = sorted(r for u in store.users for r in store.by_user(u))
    by_item = sorted(r for i in store.items for r in store.by_item(i))
    assert by_user == by_item == store.records()
    for u in store.users:
        for a in store.attributes:
            scores = list(store.user_ratings(u, a).values())
            if scores:
                assert min(scores) <= store.mean(u, a) <= max(scores)
                assert store.mean(u, a) == pytest.approx(sum(scores) / len(scores))


def test_round_trip_gzip(tmp_path):
    store = RatingsStore([RatingRecord("u1", "i1", 1, 3.0), RatingRecord("u2", "i1", 3, 5.0)])
    write_ratings(store, tmp_path / "r.csv.gz")
    assert parse_ratings(tmp_path / "r.csv.gz").same_records(store)
    cat = ConceptCatalog({"i1": {"a", "b"}})
    write_concepts(cat, tmp_path / "c.csv")
    assert parse_concepts(tmp_path / "c.csv") == cat
