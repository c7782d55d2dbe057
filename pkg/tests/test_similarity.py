import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_catalog, random_store
from semrec.errors import ConfigError, UnannotatedItemError
from semrec.ingest import ConceptCatalog, RatingRecord, RatingScale, RatingsStore

WIDE = RatingScale(-10, 10)
from semrec.similarity import (
    AttributeWeights,
    HybridWeights,
    SimilarityEngine,
    attribute_item_similarity,
    hybrid_similarity,
    multi_attribute_similarity,
    semantic_item_similarity,
    write_similarity_matrix,
)


def _store(rows, n_attributes=1, scale=RatingScale()):
    records = [RatingRecord(u, i, a, float(s)) for u, i, a, s in rows]
    return RatingsStore(records, scale=scale, n_attributes=n_attributes)


def test_proportional_deviations_give_one():
    # every user rates i and j plus a third item that pins the mean at 3
    rows = []
    for u, d in (("a", 1), ("b", 2), ("c", -1)):
        rows += [(u, "i", 1, 3 + d), (u, "j", 1, 3 + d), (u, "k", 1, 3 - 2 * d)]
    s = attribute_item_similarity(_store(rows, scale=WIDE), "i", "j", 1)
    assert s.value == pytest.approx(1.0, abs=1e-12)
    assert not s.degenerate


def test_negated_deviations_give_minus_one():
    rows = []
    for u, d in (("a", 1), ("b", 2), ("c", -1)):
        rows += [(u, "i", 1, 3 + d), (u, "j", 1, 3 - d)]
    s = attribute_item_similarity(_store(rows), "i", "j", 1)
    assert s.value == pytest.approx(-1.0, abs=1e-12)


def test_no_co_raters_is_degenerate():
    s = attribute_item_similarity(_store([("a", "i", 1, 5), ("b", "j", 1, 4)]), "i", "j", 1)
    assert s == (0.0, True)


def test_zero_norm_is_degenerate():
    s = attribute_item_similarity(_store([("a", "i", 1, 4), ("a", "j", 1, 4)]), "i", "j", 1)
    assert s == (0.0, True)


def test_five_user_fixture_matches_literal_oracle():
    rng = random.Random(11)
    rows = [(f"u{k}", it, 1, rng.randint(1, 5)) for k in range(5) for it in ("i", "j")]
    rows += [(f"u{k}", "x", 1, rng.randint(1, 5)) for k in range(5)]
    store = _store(rows)
    table = oracles.ratings_table(store.records())
    got = attribute_item_similarity(store, "i", "j", 1).value
    assert got == pytest.approx(oracles.attribute_similarity(table, store.users, "i", "j", 1), abs=1e-12)


def test_one_hot_weights_reproduce_single_attribute():
    store, _ = random_store(2)
    i, j = store.items[:2]
    for a in (1, 2, 3):
        w = [0.0, 0.0, 0.0]
        w[a - 1] = 1.0
        assert multi_attribute_similarity(store, i, j, w) == attribute_item_similarity(store, i, j, a).value


def test_weighted_blend_arithmetic():
    assert (0.6 + 0.0 - 0.3) / 3 == pytest.approx(0.1)


def test_zero_weights_rejected():
    with pytest.raises(ConfigError):
        AttributeWeights((0, 0, 0))
    with pytest.raises(ConfigError):
        HybridWeights(0, 0)
    with pytest.raises(ConfigError):
        AttributeWeights((1, -1, 1))


def test_semantic_examples():
    cat = ConceptCatalog({"p": {"a", "b"}, "q": {"a", "b"}, "r": {"c"}, "s": {"a", "b", "c"}, "t": {"b", "c", "d"}})
    assert semantic_item_similarity(cat, "p", "q") == 1.0
    assert semantic_item_similarity(cat, "p", "r") == 0.0
    assert semantic_item_similarity(cat, "s", "t") == 0.5
    with pytest.raises(UnannotatedItemError):
        semantic_item_similarity(cat, "p", "zz")


def test_hybrid_cf_only_equals_multi():
    store, _ = random_store(3)
    cat = random_catalog(3, store.items)
    i, j = store.items[:2]
    w = AttributeWeights((1, 2, 3))
    assert hybrid_similarity(store, cat, i, j, w, HybridWeights(1, 0)) == multi_attribute_similarity(store, i, j, w)


@pytest.mark.parametrize("seed", range(5))
def test_hybrid_matches_oracle(seed):
    store, records = random_store(seed, n_users=12, n_items=10)
    cat = random_catalog(seed, store.items)
    table = oracles.ratings_table(records)
    rng = random.Random(seed)
    w = tuple(rng.uniform(0.1, 2) for _ in range(3))
    hw = HybridWeights(rng.random(), rng.random())
    for i in store.items[:5]:
        for j in store.items[5:]:
            exp = oracles.hybrid_similarity(table, store.users, cat, i, j, w, hw.cf, hw.semantic)
            assert hybrid_similarity(store, cat, i, j, w, hw) == pytest.approx(exp, abs=1e-12)


def test_engine_cache_is_bit_identical():
    store, _ = random_store(4)
    cat = random_catalog(4, store.items)
    w = AttributeWeights((1, 1, 2))
    cached = SimilarityEngine(store, cat, w)
    plain = SimilarityEngine(store, cat, w, cache=False)
    for i in store.items:
        for j in store.items:
            if i != j:
                assert cached(i, j) == plain(i, j) == cached(j, i)


def test_engine_rejects_wrong_weight_count():
    store, _ = random_store(4)
    with pytest.raises(ConfigError):
        SimilarityEngine(store, ConceptCatalog({}), AttributeWeights((1, 1)))


def test_matrix_export():
    store, _ = random_store(5, n_items=4)
    cat = random_catalog(5, store.items)
    rows = SimilarityEngine(store, cat, AttributeWeights()).matrix()
    assert len(rows) == 6
    buf = io.StringIO()
    write_similarity_matrix(rows, buf)
    assert buf.getvalue().splitlines()[0] == "item_i,item_j,score"


@given(st.integers(0, 10_000), st.integers(-3, 3))
@settings(max_examples=40, deadline=None)
def test_shift_invariance(seed, shift):
    rng = random.Random(seed)
    rows = [(f"u{k}", it, 1, rng.randint(1, 5)) for k in range(6) for it in ("i", "j", "x") if rng.random() < 0.8]
    base = _store(rows)
    victim = f"u{rng.randrange(6)}"
    moved = [(u, it, a, s + shift if u == victim else s) for u, it, a, s in rows]
    shifted = _store(moved, scale=WIDE)
    assert attribute_item_similarity(shifted, "i", "j", 1).value == pytest.approx(
        attribute_item_similarity(base, "i", "j", 1).value, abs=1e-12
    )


@given(
    st.frozensets(st.sampled_from("abcdef"), min_size=1),
    st.frozensets(st.sampled_from("abcdef"), min_size=1),
    st.sampled_from("ghij"),
)
def test_semantic_monotone_in_shared_concept(ci, cj, extra):
    before = semantic_item_similarity(ConceptCatalog({"i": ci, "j": cj}), "i", "j")
    after = semantic_item_similarity(ConceptCatalog({"i": ci | {extra}, "j": cj | {extra}}), "i", "j")
    assert after >= before
    assert 0 <= before <= 1


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_symmetry_and_range(seed):
    store, _ = random_store(seed, n_users=8, n_items=6)
    cat = random_catalog(seed, store.items)
    hw = HybridWeights()
    for i in store.items:
        for j in store.items:
            if i == j:
                continue
            for a in store.attributes:
                s = attribute_item_similarity(store, i, j, a).value
                assert s == attribute_item_similarity(store, j, i, a).value
                assert -1 <= s <= 1
            h = hybrid_similarity(store, cat, i, j, (1, 1, 1), hw)
            assert h == hybrid_similarity(store, cat, j, i, (1, 1, 1), hw)
            assert -hw.cf <= h <= hw.cf + hw.semantic
