"""Influence-ordered semantic-social recommendation and the user-based CF baseline."""

from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass, field
from typing import Collection, Iterable, Mapping

import numpy as np

from .errors import ConfigError, EmptyNeighborhoodError, LookupFailure, UnannotatedItemError
from .graph import MEASURES, CentralityScores, SocialGraph, influence_ranking
from .ingest import ConceptCatalog, RatingsStore
from .profile import SemanticUserProfile, profile_product_similarity
from .similarity import Similarity

TRAVERSALS = ("scan", "neighbor")


@dataclass(frozen=True)
class RecommendationQuery:
    product: str
    threshold: float = 0.5
    influence_measure: str = "degree"
    coverage_budget: float = 0.8
    max_results: int | None = None
    traversal: str = "scan"

    def __post_init__(self):
        # values above 1 are allowed and simply unattainable
        if not self.threshold >= 0.0:
            raise ConfigError(f"threshold must be non-negative, got {self.threshold}")
        if not 0.0 < self.coverage_budget <= 1.0:
            raise ConfigError(f"coverage budget must lie in (0, 1], got {self.coverage_budget}")
        if self.max_results is not None and self.max_results < 1:
            raise ConfigError("max_results must be a positive integer")
        if self.influence_measure not in MEASURES:
            raise ConfigError(f"unknown influence measure {self.influence_measure!r}")
        if self.traversal not in TRAVERSALS:
            raise ConfigError(f"unknown traversal {self.traversal!r}; expected one of {TRAVERSALS}")


@dataclass
class RecommendationResult:
    product: str
    accepted: list[str]
    examined: int
    scores: dict[str, float]  # every examined customer -> profile/product score
    elapsed: float = field(default=0.0, compare=False)  # seconds

    @property
    def accepted_scores(self) -> list[tuple[str, float]]:
        return [(c, self.scores[c]) for c in self.accepted]

    def to_record(self, timing: bool = True) -> dict:
        rec = {
            "item": self.product,
            "accepted_count": len(self.accepted),
            "accepted": list(self.accepted),
            "examined_nodes": self.examined,
        }
        if timing:
            rec["elapsed_ms"] = round(self.elapsed * 1000.0, 3)
        return rec

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_record(timing), sort_keys=True)


def examination_limit(n: int, budget: float) -> int:
    # guard against budget*n landing a hair above an integer
    return min(n, math.ceil(budget * n - 1e-9))


def _neighbor_order(g: SocialGraph, ranking: list[str]):
    """Best-first expansion: always examine the highest-ranked discovered node,
    restarting from the best undiscovered node when the frontier empties."""
    rank = {v: r for r, v in enumerate(ranking)}
    seen: set[str] = set()
    heap: list[int] = []
    cursor = 0
    while True:
        if not heap:
            while cursor < len(ranking) and ranking[cursor] in seen:
                cursor += 1
            if cursor == len(ranking):
                return
            seen.add(ranking[cursor])
            heapq.heappush(heap, cursor)
        v = ranking[heapq.heappop(heap)]
        yield v
        for w in g.neighbors(v):
            if w not in seen:
                seen.add(w)
                heapq.heappush(heap, rank[w])


def recommend_customers(
    g: SocialGraph,
    profiles: Mapping[str, SemanticUserProfile],
    catalog: ConceptCatalog,
    query: RecommendationQuery,
    ranking: list[str] | CentralityScores | None = None,
    exclude: Collection[str] = (),
    comparison: str = "mass",
) -> RecommendationResult:
    """Walk customers from most to least influential, keeping those whose
    profile matches the product at or above the query threshold.

    Stops after ``max_results`` acceptances, after ``ceil(budget * n)``
    examinations, or when every node has been seen.  Customers without a
    profile (or with an empty one) are examined but never accepted.
    Customers in ``exclude`` are passed over without being examined.
    ``ranking`` may carry a precomputed influence order for the query's
    measure; it is computed from ``g`` otherwise.
    """
    start = time.perf_counter()
    if query.product not in catalog:
        raise UnannotatedItemError(query.product)
    concepts = catalog[query.product]
    if ranking is None:
        ranking = influence_ranking(g, query.influence_measure)
    elif isinstance(ranking, CentralityScores):
        ranking = influence_ranking(g, ranking)
    order = _neighbor_order(g, ranking) if query.traversal == "neighbor" else iter(ranking)

    limit = examination_limit(g.n, query.coverage_budget)
    accepted: list[str] = []
    scores: dict[str, float] = {}
    examined = 0
    for customer in order:
        if examined >= limit:
            break
        if customer in exclude:
            continue
        examined += 1
        profile = profiles.get(customer)
        score = profile_product_similarity(profile, concepts, comparison) if profile else 0.0
        scores[customer] = score
        if profile and score >= query.threshold:
            accepted.append(customer)
            if query.max_results is not None and len(accepted) >= query.max_results:
                break
    return RecommendationResult(query.product, accepted, examined, scores, time.perf_counter() - start)


# -- collaborative-filtering baseline ----------------------------------------


def pearson_user_similarity(store: RatingsStore, u: str, v: str, attribute: int) -> Similarity:
    """Pearson correlation over the items both users rated on ``attribute``,
    centred on each user's mean over that co-rated set."""
    store.check_attribute(attribute)
    ru = store.user_ratings(u, attribute)
    rv = store.user_ratings(v, attribute)
    co = sorted(i for i in ru if i in rv)
    if len(co) < 2:
        return Similarity(0.0, True)
    mu = sum(ru[i] for i in co) / len(co)
    mv = sum(rv[i] for i in co) / len(co)
    num = suu = svv = 0.0
    for i in co:
        du = ru[i] - mu
        dv = rv[i] - mv
        num += du * dv
        suu += du * du
        svv += dv * dv
    if suu == 0.0 or svv == 0.0:
        return Similarity(0.0, True)
    return Similarity(max(-1.0, min(1.0, num / (math.sqrt(suu) * math.sqrt(svv)))), False)


class UserSimilarityMatrix:
    """All-pairs co-rated Pearson correlation for one attribute, vectorized.

    Uses the moment form ``n*Sxy - Sx*Sy`` over co-rated masks, which is exact
    for integer scores; tiny variances are treated as zero.
    """

    def __init__(self, store: RatingsStore, attribute: int):
        store.check_attribute(attribute)
        self.users = store.users
        self.index = {u: k for k, u in enumerate(self.users)}
        items = store.items
        col = {it: k for k, it in enumerate(items)}
        R = np.zeros((len(self.users), len(items)))
        M = np.zeros_like(R)
        for k, u in enumerate(self.users):
            for it, s in store.user_ratings(u, attribute).items():
                R[k, col[it]] = s
                M[k, col[it]] = 1.0
        n = M @ M.T
        sxy = R @ R.T
        sx = R @ M.T  # sx[u, v] = sum of u's scores over items co-rated with v
        sxx = (R * R) @ M.T
        cov = n * sxy - sx * sx.T
        var_u = n * sxx - sx * sx
        var_v = var_u.T
        span = max(store.scale.high - store.scale.low, 1.0)
        eps = 1e-9 * span * span * np.maximum(n, 1.0) ** 2
        ok = (n >= 2) & (var_u > eps) & (var_v > eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            sim = np.where(ok, cov / (np.sqrt(np.where(ok, var_u, 1.0)) * np.sqrt(np.where(ok, var_v, 1.0))), 0.0)
        np.fill_diagonal(sim, 0.0)
        self.values = np.clip(sim, -1.0, 1.0)

    def __call__(self, u: str, v: str) -> float:
        return float(self.values[self.index[u], self.index[v]])


@dataclass(frozen=True)
class RatingPrediction:
    user: str
    item: str
    score: float
    neighbors: int


def baseline_cf_recommend(
    store: RatingsStore,
    product: str,
    k: int = 20,
    liking_threshold: float = 4,
    attribute: int | None = None,
    similarities: UserSimilarityMatrix | None = None,
    candidates: Iterable[str] | None = None,
) -> tuple[list[str], dict[str, RatingPrediction]]:
    """Classic user-based CF for one product.

    Every user who has not rated the product (or each of ``candidates``) gets
    a prediction from the ``k`` most similar raters with positive
    similarity: candidate mean + similarity-weighted mean of the raters'
    deviations from their own means, clamped to the scale.  Returns the
    customers predicted at or above ``liking_threshold`` (highest first,
    ties by id) and all predictions.
    """
    attribute = store.n_attributes if attribute is None else attribute
    store.check_attribute(attribute)
    if k < 1:
        raise ConfigError("neighborhood size k must be >= 1")
    if not store.has_item(product) or not store.item_ratings(product, attribute):
        raise EmptyNeighborhoodError(f"no user rated {product!r} on attribute {attribute}")
    raters = store.item_ratings(product, attribute)
    rater_ids = sorted(raters)
    deviation = {r: raters[r] - store.mean(r, attribute) for r in rater_ids}
    if candidates is None:
        candidates = [u for u in store.users if u not in raters]
    predictions: dict[str, RatingPrediction] = {}
    for c in sorted(set(candidates)):
        if c in raters:
            continue
        if not store.has_user(c):
            raise LookupFailure(f"unknown user {c!r}")
        if similarities is not None:
            sims = [(similarities(c, r), r) for r in rater_ids]
        else:
            sims = [(pearson_user_similarity(store, c, r, attribute).value, r) for r in rater_ids]
        sims = [(s, r) for s, r in sims if s > 0]
        if not sims:
            continue
        sims.sort(key=lambda t: (-t[0], t[1]))
        top = sims[:k]
        try:
            base = store.mean(c, attribute)
        except LookupFailure:
            continue
        wsum = sum(s for s, _ in top)
        pred = base + sum(s * deviation[r] for s, r in top) / wsum
        predictions[c] = RatingPrediction(c, product, store.scale.clamp(pred), len(top))
    liked = [p for p in predictions.values() if p.score >= liking_threshold]
    liked.sort(key=lambda p: (-p.score, p.user))
    return [p.user for p in liked], predictions
