"""Item-item similarity: per-attribute adjusted correlation, weighted
multi-attribute blend, concept-set overlap, and the hybrid of the last two.
"""

from __future__ import annotations

import hashlib
import io
import math
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, NamedTuple, Sequence

from .errors import ConfigError, LookupFailure, UnannotatedItemError
from .ingest import ConceptCatalog, RatingsStore


class Similarity(NamedTuple):
    value: float
    degenerate: bool = False


@dataclass(frozen=True)
class AttributeWeights:
    weights: tuple[float, ...] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(w < 0 or not math.isfinite(w) for w in self.weights):
            raise ConfigError(f"attribute weights must be finite and non-negative: {self.weights}")
        if sum(self.weights) <= 0:
            raise ConfigError("attribute weights sum to zero")

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class HybridWeights:
    cf: float = 0.5
    semantic: float = 0.5

    def __post_init__(self):
        for name in ("cf", "semantic"):
            w = float(getattr(self, name))
            if w < 0 or not math.isfinite(w):
                raise ConfigError(f"hybrid weight {name} must be finite and non-negative")
            object.__setattr__(self, name, w)
        if self.cf + self.semantic <= 0:
            raise ConfigError("hybrid weights sum to zero")


def attribute_item_similarity(store: RatingsStore, i: str, j: str, attribute: int) -> Similarity:
    """Adjusted correlation of items ``i`` and ``j`` on one attribute.

    Sums run over users who rated both items on ``attribute``; each score is
    centred on the user's mean over all of their ratings on that attribute.
    Empty co-rater sets and zero-norm deviation vectors give 0, flagged.
    """
    store.check_attribute(attribute)
    ri = store.item_ratings(i, attribute)
    rj = store.item_ratings(j, attribute)
    if len(rj) < len(ri):
        small, other = rj, ri
    else:
        small, other = ri, rj
    # sorted co-raters fix the summation order, which keeps s(i,j) == s(j,i) bitwise
    co = sorted(u for u in small if u in other)
    if not co:
        return Similarity(0.0, True)
    num = sii = sjj = 0.0
    for u in co:
        mu = store.mean(u, attribute)
        di = ri[u] - mu
        dj = rj[u] - mu
        num += di * dj
        sii += di * di
        sjj += dj * dj
    if sii == 0.0 or sjj == 0.0:
        return Similarity(0.0, True)
    value = num / (math.sqrt(sii) * math.sqrt(sjj))
    return Similarity(max(-1.0, min(1.0, value)), False)


def multi_attribute_similarity(
    store: RatingsStore, i: str, j: str, weights: AttributeWeights | Sequence[float]
) -> float:
    if not isinstance(weights, AttributeWeights):
        weights = AttributeWeights(tuple(weights))
    if len(weights) != store.n_attributes:
        raise ConfigError(f"{len(weights)} attribute weights for {store.n_attributes} attributes")
    total = 0.0
    for a, w in zip(store.attributes, weights.weights):
        if w:
            total += w * attribute_item_similarity(store, i, j, a).value
    return total / sum(weights.weights)


def semantic_item_similarity(catalog: ConceptCatalog, i: str, j: str) -> float:
    """Shared concepts over the union of both concept sets."""
    try:
        ci = catalog[i]
    except KeyError:
        raise UnannotatedItemError(i) from None
    try:
        cj = catalog[j]
    except KeyError:
        raise UnannotatedItemError(j) from None
    union = len(ci | cj)
    return len(ci & cj) / union if union else 0.0


def hybrid_similarity(
    store: RatingsStore,
    catalog: ConceptCatalog,
    i: str,
    j: str,
    weights: AttributeWeights | Sequence[float],
    hybrid: HybridWeights = HybridWeights(),
) -> float:
    cf = multi_attribute_similarity(store, i, j, weights) if hybrid.cf else 0.0
    sem = semantic_item_similarity(catalog, i, j) if hybrid.semantic else 0.0
    return hybrid.cf * cf + hybrid.semantic * sem


class SimilarityEngine:
    """Configured similarity evaluator with an optional, thread-safe pair memo.

    Cached values are the exact floats the uncached functions return; the
    cache key is the unordered item pair plus a digest of the weights.
    """

    def __init__(
        self,
        store: RatingsStore,
        catalog: ConceptCatalog,
        weights: AttributeWeights,
        hybrid: HybridWeights = HybridWeights(),
        cache: bool = True,
    ):
        if len(weights) != store.n_attributes:
            raise ConfigError(f"{len(weights)} attribute weights for {store.n_attributes} attributes")
        self.store = store
        self.catalog = catalog
        self.weights = weights
        self.hybrid = hybrid
        self._cache: dict | None = {} if cache else None
        self._lock = threading.Lock()
        self.config_hash = hashlib.sha256(
            repr((weights.weights, hybrid.cf, hybrid.semantic)).encode()
        ).hexdigest()[:16]

    def __call__(self, i: str, j: str) -> float:
        if self._cache is None:
            return hybrid_similarity(self.store, self.catalog, i, j, self.weights, self.hybrid)
        key = (min(i, j), max(i, j), self.config_hash)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = hybrid_similarity(self.store, self.catalog, i, j, self.weights, self.hybrid)
        with self._lock:
            self._cache.setdefault(key, value)
        return value

    def matrix(self, items: Iterable[str] | None = None) -> list[tuple[str, str, float]]:
        """Upper-triangle hybrid similarities for the given items (default: all annotated rated items)."""
        if items is None:
            items = [it for it in self.store.items if it in self.catalog]
        items = sorted(set(items))
        out = []
        for a, i in enumerate(items):
            for j in items[a + 1:]:
                try:
                    out.append((i, j, self(i, j)))
                except LookupFailure:
                    continue
        return out


def write_similarity_matrix(
    rows: Iterable[tuple[str, str, float]], target: str | os.PathLike | IO[str]
) -> None:
    buf = io.StringIO()
    buf.write("item_i,item_j,score\n")
    for i, j, s in rows:
        buf.write(f"{i},{j},{s!r}\n")
    if isinstance(target, (str, os.PathLike)):
        Path(target).write_text(buf.getvalue(), encoding="utf-8")
    else:
        target.write(buf.getvalue())
