"""Semantic user profiles: normalized concept weights drawn from liked items."""

from __future__ import annotations

import io
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

from .errors import ConfigError, LookupFailure, ParseError
from .ingest import ConceptCatalog, RatingsStore

COMPARISONS = ("mass", "cosine")


@dataclass
class SemanticUserProfile:
    user: str
    weights: dict[str, float] = field(default_factory=dict)
    total: float = 0.0  # accumulated weight before normalization

    def __bool__(self) -> bool:
        return bool(self.weights)

    def __len__(self) -> int:
        return len(self.weights)


def build_user_profile(
    store: RatingsStore,
    catalog: ConceptCatalog,
    user: str,
    liking_threshold: float = 4,
    overall_attribute: int | None = None,
) -> SemanticUserProfile:
    """Accumulate each liked item's score onto its concepts, then normalize to sum 1.

    An item counts as liked when the user's score on the overall attribute
    (the last one unless given) is at least ``liking_threshold``.  Items
    without annotations contribute nothing.
    """
    if not store.has_user(user):
        raise LookupFailure(f"unknown user {user!r}")
    attribute = store.n_attributes if overall_attribute is None else overall_attribute
    store.check_attribute(attribute)
    acc: dict[str, float] = defaultdict(float)
    for item, score in sorted(store.user_ratings(user, attribute).items()):
        if score < liking_threshold:
            continue
        for concept in sorted(catalog.get(item, ())):
            acc[concept] += score
    total = sum(acc.values())
    if total <= 0:
        return SemanticUserProfile(user)
    return SemanticUserProfile(user, {c: w / total for c, w in sorted(acc.items())}, total)


def build_profiles(
    store: RatingsStore,
    catalog: ConceptCatalog,
    liking_threshold: float = 4,
    overall_attribute: int | None = None,
) -> dict[str, SemanticUserProfile]:
    return {
        u: build_user_profile(store, catalog, u, liking_threshold, overall_attribute)
        for u in store.users
    }


def profile_product_similarity(
    profile: SemanticUserProfile, product_concepts: Iterable[str], method: str = "mass"
) -> float:
    """Match a customer profile against a product's concept set, in [0, 1].

    ``mass`` is the share of the profile's weight that falls on the product's
    concepts; ``cosine`` treats the product as a 0/1 concept vector.
    """
    concepts = set(product_concepts)
    if not profile.weights or not concepts:
        return 0.0
    inside = sum(w for c, w in profile.weights.items() if c in concepts)
    if method == "mass":
        return min(1.0, inside)
    if method == "cosine":
        norm = math.sqrt(sum(w * w for w in profile.weights.values()))
        return min(1.0, inside / (norm * math.sqrt(len(concepts))))
    raise ConfigError(f"unknown profile comparison {method!r}; expected one of {COMPARISONS}")


def write_profiles(
    profiles: Mapping[str, SemanticUserProfile], target: str | os.PathLike | IO[str]
) -> None:
    buf = io.StringIO()
    buf.write("user,concept,weight\n")
    for user in sorted(profiles):
        for concept, w in sorted(profiles[user].weights.items()):
            buf.write(f"{user},{concept},{w:.6f}\n")
    if isinstance(target, (str, os.PathLike)):
        Path(target).write_text(buf.getvalue(), encoding="utf-8")
    else:
        target.write(buf.getvalue())


def read_profiles(source: str | os.PathLike | IO[str]) -> dict[str, SemanticUserProfile]:
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, os.PathLike)) else source.read()
    out: dict[str, SemanticUserProfile] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or line == "user,concept,weight":
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected user,concept,weight, got {line!r}", line=lineno)
        try:
            w = float(parts[2])
        except ValueError:
            raise ParseError(f"non-numeric weight {parts[2]!r}", line=lineno) from None
        out.setdefault(parts[0], SemanticUserProfile(parts[0])).weights[parts[1]] = w
    return out
