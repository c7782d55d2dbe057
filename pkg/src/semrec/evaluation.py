"""Holdout evaluation of the semantic-social recommender against the CF baseline."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .config import EngineConfig
from .errors import NoOverlapError, SemrecError
from .graph import build_co_rating_graph, influence_ranking
from .ingest import ConceptCatalog, RatingsStore
from .profile import build_profiles
from .recommend import (
    RatingPrediction,
    RecommendationQuery,
    UserSimilarityMatrix,
    baseline_cf_recommend,
    recommend_customers,
)

SEMANTIC = "semantic-social"
BASELINE = "baseline-cf"


def precision(recommended: Iterable[str], relevant: Iterable[str]) -> float:
    """Share of recommended customers that are relevant; 0 when nothing was recommended."""
    rec = set(recommended)
    if not rec:
        return 0.0
    return len(rec & set(relevant)) / len(rec)


def recall(recommended: Iterable[str], relevant: Iterable[str]) -> float:
    """Share of relevant customers that were recommended; 0 when nothing is relevant."""
    rel = set(relevant)
    if not rel:
        return 0.0
    return len(rel & set(recommended)) / len(rel)


class ErrorSummary(NamedTuple):
    mae: float
    matched: int
    unmatched: int


def mean_absolute_error(
    predictions: Iterable[RatingPrediction], actuals: Mapping[tuple[str, str], float]
) -> ErrorSummary:
    """MAE over predictions that have a held-out actual; the rest are only counted."""
    total = 0.0
    matched = unmatched = 0
    for p in predictions:
        actual = actuals.get((p.user, p.item))
        if actual is None:
            unmatched += 1
            continue
        total += abs(p.score - actual)
        matched += 1
    if not matched:
        raise NoOverlapError(f"no prediction matches a held-out rating ({unmatched} unmatched)")
    return ErrorSummary(total / matched, matched, unmatched)


@dataclass
class GroundTruth:
    relevant: dict[str, frozenset[str]]  # product -> held-out customers who liked it
    heldout: dict[str, tuple[str, ...]]  # product -> every held-out rater
    actuals: dict[tuple[str, str], float]  # (user, product) -> held-out overall score

    def pairs(self) -> set[tuple[str, str]]:
        return {(u, p) for p, users in self.heldout.items() for u in users}


def holdout_split(
    store: RatingsStore,
    products: Sequence[str],
    fraction: float = 0.2,
    seed: int = 0,
    liking_threshold: float = 4,
) -> tuple[RatingsStore, GroundTruth]:
    """Withhold a seeded fraction of each product's raters.

    At least one rater per product stays in training so the baseline still
    has a neighborhood.  All attributes of a withheld (user, product) pair
    leave the training store.
    """
    rng = np.random.default_rng(seed)
    overall = store.n_attributes
    relevant, heldout, actuals = {}, {}, {}
    for product in dict.fromkeys(products):
        raters = sorted(store.item_ratings(product, overall)) if store.has_item(product) else []
        n_hold = min(len(raters) - 1, max(1, round(fraction * len(raters)))) if raters else 0
        chosen = sorted(rng.choice(raters, size=n_hold, replace=False).tolist()) if n_hold > 0 else []
        heldout[product] = tuple(chosen)
        for u in chosen:
            actuals[u, product] = store.rating(u, product, overall)
        relevant[product] = frozenset(u for u in chosen if actuals[u, product] >= liking_threshold)
    truth = GroundTruth(relevant, heldout, actuals)
    training = store.without(truth.pairs())
    leaked = [
        (u, p) for u, p in truth.pairs()
        if any(training.rating(u, p, a) is not None for a in training.attributes)
    ]
    assert not leaked, f"holdout leak: {leaked[:3]}"
    return training, truth


def choose_query_items(store: RatingsStore, n: int = 10, seed: int = 0, min_raters: int = 10) -> list[str]:
    """Seeded pick of ``n`` items that have at least ``min_raters`` overall ratings."""
    overall = store.n_attributes
    eligible = [it for it in store.items if len(store.item_ratings(it, overall)) >= min_raters]
    if len(eligible) < n:
        eligible = sorted(store.items, key=lambda it: (-len(store.item_ratings(it, overall)), it))[:n]
        return sorted(eligible)
    rng = np.random.default_rng(seed)
    return sorted(rng.choice(eligible, size=n, replace=False).tolist())


@dataclass
class QueryRow:
    item: str
    method: str
    accepted_count: int = 0
    examined_nodes: int = 0
    precision: float = 0.0
    recall: float = 0.0
    relevant_count: int = 0
    mae: float | None = None
    flags: list[str] = field(default_factory=list)
    error: str | None = None
    elapsed_ms: float | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_dict(self, timing: bool) -> dict:
        d = {
            "item": self.item,
            "method": self.method,
            "accepted_count": self.accepted_count,
            "examined_nodes": self.examined_nodes,
            "precision": self.precision,
            "recall": self.recall,
            "relevant_count": self.relevant_count,
            "mae": self.mae,
            "flags": list(self.flags),
            "error": self.error,
        }
        if timing:
            d["elapsed_ms"] = self.elapsed_ms
        return d


@dataclass
class EvaluationReport:
    rows: list[QueryRow]
    config: dict
    n_nodes: int
    n_edges: int
    dataset: dict = field(default_factory=dict)
    timing: bool = False

    def method_rows(self, method: str) -> list[QueryRow]:
        return [r for r in self.rows if r.method == method]

    def aggregate(self, method: str) -> dict:
        ok = [r for r in self.method_rows(method) if not r.failed]
        n = len(ok)
        maes = [r.mae for r in ok if r.mae is not None]
        return {
            "queries": len(self.method_rows(method)),
            "failed": len(self.method_rows(method)) - n,
            "mean_precision": sum(r.precision for r in ok) / n if n else 0.0,
            "mean_recall": sum(r.recall for r in ok) / n if n else 0.0,
            "mean_accepted": sum(r.accepted_count for r in ok) / n if n else 0.0,
            "mean_examined": sum(r.examined_nodes for r in ok) / n if n else 0.0,
            "mean_examined_fraction": (
                sum(r.examined_nodes for r in ok) / (n * self.n_nodes) if n and self.n_nodes else 0.0
            ),
            "mae": sum(maes) / len(maes) if maes else None,
        }

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "dataset": self.dataset,
            "graph": {"nodes": self.n_nodes, "edges": self.n_edges},
            "rows": [r.to_dict(self.timing) for r in self.rows],
            "aggregates": {m: self.aggregate(m) for m in (SEMANTIC, BASELINE)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        cols = ["item", "method", "accepted", "examined", "relevant", "precision", "recall", "mae"]
        if self.timing:
            cols.append("time_ms")
        body = []
        for r in self.rows:
            cells = [
                r.item,
                r.method,
                str(r.accepted_count),
                str(r.examined_nodes),
                str(r.relevant_count),
                f"{r.precision:.4f}",
                f"{r.recall:.4f}",
                "-" if r.mae is None else f"{r.mae:.4f}",
            ]
            if r.failed:
                cells[2:8] = ["FAILED"] + [""] * 5
            if self.timing:
                cells.append("-" if r.elapsed_ms is None else f"{r.elapsed_ms:.1f}")
            body.append(cells)
        widths = [max(len(c), *(len(row[k]) for row in body)) if body else len(c) for k, c in enumerate(cols)]

        def line(cells):
            return "  ".join(c.ljust(w) if k < 2 else c.rjust(w) for k, (c, w) in enumerate(zip(cells, widths))).rstrip()

        out = [
            f"graph: nodes={self.n_nodes} edges={self.n_edges}",
            "config: " + ", ".join(
                f"{k}={self.config[k]}" for k in (
                    "threshold", "influence_measure", "coverage_budget", "liking_threshold",
                    "attribute_weights", "hybrid_weights", "neighborhood_size",
                    "holdout_fraction", "seed",
                ) if k in self.config
            ),
            "",
            line(cols),
            line(["-" * w for w in widths]),
        ]
        out += [line(cells) for cells in body]
        out.append("")
        for m in (SEMANTIC, BASELINE):
            a = self.aggregate(m)
            mae = "-" if a["mae"] is None else f"{a['mae']:.4f}"
            out.append(
                f"{m}: mean precision {a['mean_precision']:.4f}  mean recall {a['mean_recall']:.4f}  "
                f"mean examined {a['mean_examined']:.1f} ({a['mean_examined_fraction']:.3f} of nodes)  "
                f"MAE {mae}  failed {a['failed']}/{a['queries']}"
            )
        for flag, rows in _flag_notes(self.rows).items():
            out.append(f"note: {flag} on {', '.join(rows)}")
        return "\n".join(out) + "\n"


def _flag_notes(rows: list[QueryRow]) -> dict[str, list[str]]:
    notes: dict[str, list[str]] = {}
    for r in rows:
        for f in r.flags:
            notes.setdefault(f, []).append(f"{r.item}/{r.method}")
        if r.failed:
            notes.setdefault(f"error ({r.error})", []).append(f"{r.item}/{r.method}")
    return notes


def run_benchmark(
    store: RatingsStore,
    catalog: ConceptCatalog,
    queries: Sequence[RecommendationQuery | str],
    config: EngineConfig = EngineConfig(),
    timing: bool = False,
    dataset_info: dict | None = None,
) -> EvaluationReport:
    """Run every query through both recommenders on a seeded holdout split.

    The graph, profiles and baseline similarities are built once from the
    training ratings.  Customers who rated the query product in training are
    excluded from both methods: they already own it.  Errors are recorded
    per row and never abort the batch.
    """
    if not queries:
        raise ValueError("at least one query is required")
    queries = [
        q if isinstance(q, RecommendationQuery) else RecommendationQuery(
            q,
            threshold=config.threshold,
            influence_measure=config.influence_measure,
            coverage_budget=config.coverage_budget,
            max_results=config.max_results,
            traversal=config.traversal,
        )
        for q in queries
    ]
    overall = store.n_attributes
    training, truth = holdout_split(
        store, [q.product for q in queries], config.holdout_fraction, config.seed, config.liking_threshold
    )
    graph = build_co_rating_graph(training, config.agreement, config.min_agreements)
    profiles = build_profiles(training, catalog, config.liking_threshold, overall)
    rankings: dict[str, list[str]] = {}
    user_sims = UserSimilarityMatrix(training, overall)

    rows: list[QueryRow] = []
    for q in queries:
        relevant = truth.relevant.get(q.product, frozenset())
        owners = set(training.item_ratings(q.product, overall)) if training.has_item(q.product) else set()
        flags = [] if relevant else ["no-relevant-customers"]

        row = QueryRow(q.product, SEMANTIC, relevant_count=len(relevant), flags=list(flags))
        t0 = time.perf_counter()
        try:
            if q.influence_measure not in rankings:
                rankings[q.influence_measure] = influence_ranking(graph, q.influence_measure)
            res = recommend_customers(
                graph, profiles, catalog, q, rankings[q.influence_measure],
                exclude=owners, comparison=config.profile_comparison,
            )
            row.accepted_count = len(res.accepted)
            row.examined_nodes = res.examined
            row.precision = precision(res.accepted, relevant)
            row.recall = recall(res.accepted, relevant)
            if not res.accepted:
                row.flags.append("empty-recommendation")
        except SemrecError as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        row.elapsed_ms = round((time.perf_counter() - t0) * 1000.0, 3)
        rows.append(row)

        row = QueryRow(q.product, BASELINE, relevant_count=len(relevant), flags=list(flags))
        t0 = time.perf_counter()
        try:
            liked, predictions = baseline_cf_recommend(
                training, q.product, config.neighborhood_size, config.liking_threshold,
                overall, similarities=user_sims,
            )
            if q.max_results is not None:
                liked = liked[: q.max_results]
            row.accepted_count = len(liked)
            row.examined_nodes = len(training.users) - len(owners)
            row.precision = precision(liked, relevant)
            row.recall = recall(liked, relevant)
            if not liked:
                row.flags.append("empty-recommendation")
            try:
                row.mae = mean_absolute_error(predictions.values(), truth.actuals).mae
            except NoOverlapError:
                row.flags.append("no-mae-overlap")
        except SemrecError as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        row.elapsed_ms = round((time.perf_counter() - t0) * 1000.0, 3)
        rows.append(row)

    echo = config.to_dict()
    echo["queries"] = [
        {
            "item": q.product, "threshold": q.threshold, "influence_measure": q.influence_measure,
            "coverage_budget": q.coverage_budget, "max_results": q.max_results, "traversal": q.traversal,
        }
        for q in queries
    ]
    return EvaluationReport(rows, echo, graph.n, graph.m, dataset_info or {}, timing)
