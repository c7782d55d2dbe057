import random

import pytest

from semrec.ingest import ConceptCatalog, RatingRecord, RatingsStore

_acceptance: list[tuple[str, str]] = []


def random_store(seed, n_users=20, n_items=20, n_attributes=3, density=0.5):
    """Random integer 1..5 ratings; every user rates at least two items."""
    rng = random.Random(seed)
    users = [f"u{k:02d}" for k in range(n_users)]
    items = [f"i{k:02d}" for k in range(n_items)]
    records = []
    for u in users:
        rated = [i for i in items if rng.random() < density] or rng.sample(items, 2)
        for i in rated:
            for a in range(1, n_attributes + 1):
                records.append(RatingRecord(u, i, a, float(rng.randint(1, 5))))
    return RatingsStore(records, n_attributes=n_attributes), records


def random_catalog(seed, items, n_concepts=8):
    rng = random.Random(seed)
    pool = [f"c{k}" for k in range(n_concepts)]
    return ConceptCatalog({i: frozenset(rng.sample(pool, rng.randint(1, 4))) for i in items})


def random_graph_edges(seed, n, p):
    rng = random.Random(seed)
    nodes = [f"n{k:02d}" for k in range(n)]
    edges = [(nodes[a], nodes[b], 1) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return nodes, edges


@pytest.fixture
def data_dir(request):
    from pathlib import Path

    return Path(request.fspath).parent / "data"


def pytest_runtest_logreport(report):
    if report.when != "call" or "acceptance" not in report.keywords:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{outcome}  {name}")


def random_recommend_fixture(seed, max_customers=50):
    """Random graph, profiles and a product for traversal tests.

    Returns (nodes, edges, profile weight dicts, catalog, product id).
    Roughly one customer in six has no profile at all.
    """
    rng = random.Random(seed)
    n = rng.randint(6, max_customers)
    nodes, edges = random_graph_edges(seed, n, rng.uniform(0.05, 0.3))
    pool = [f"c{k}" for k in range(6)]
    profiles = {}
    for v in nodes:
        if rng.random() < 1 / 6:
            continue
        chosen = rng.sample(pool, rng.randint(1, 4))
        raw = {c: rng.randint(1, 9) for c in chosen}
        total = sum(raw.values())
        profiles[v] = {c: w / total for c, w in sorted(raw.items())}
    catalog = ConceptCatalog({"prod": frozenset(rng.sample(pool, rng.randint(1, 3)))})
    return nodes, edges, profiles, catalog, "prod"
