"""Seeded synthetic ratings with planted communities.

Each community favours its own slice of the concept vocabulary.  Items get a
home community and draw most of their concepts from that slice; every
community holds one shared opinion of every item (high for home items, low
otherwise), and members mostly rate items from their own community, echoing
that shared opinion with a little noise.  Same-community users therefore
agree on ratings, which is what the co-rating graph picks up, and the
members of an item's home community are the planted audience for it.
By default every item also carries its community's first concept, a shared
category label that keeps liked items of one community semantically close.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .ingest import ConceptCatalog, RatingRecord, RatingScale, RatingsStore


@dataclass
class SyntheticDataset:
    store: RatingsStore
    catalog: ConceptCatalog
    community: dict[str, int]  # user -> community
    item_community: dict[str, int]  # item -> home community
    planted: dict[str, frozenset[str]]  # item -> members of its home community
    params: dict

    @property
    def n_communities(self) -> int:
        return self.params["community_count"]


def _ids(prefix: str, n: int) -> list[str]:
    width = max(4, len(str(n - 1)))
    return [f"{prefix}{k:0{width}d}" for k in range(n)]


def generate_synthetic(
    n_users: int,
    n_items: int,
    n_concepts: int,
    community_count: int,
    seed: int = 0,
    *,
    ratings_per_user: float = 12,
    activity_spread: float = 0.8,
    affinity: float = 0.8,
    concepts_per_item: tuple[int, int] = (1, 2),
    concept_purity: float = 0.85,
    anchor_concept: bool = True,
    noise: float = 0.1,
    n_attributes: int = 3,
) -> SyntheticDataset:
    """Generate a reproducible dataset; the same arguments always give the same data.

    ``ratings_per_user`` is the mean number of ratings per user (at least 2
    each): Poisson, or a long-tailed lognormal-Poisson mix when
    ``activity_spread`` (lognormal sigma) is positive.  ``affinity`` is the
    chance a rating lands on a home-community item, ``concept_purity`` the
    chance an item concept comes from its community's slice, and ``noise``
    the chance a score deviates by one star from the community opinion.
    With ``anchor_concept`` every item also carries the first concept of its
    community's slice, like a shared category label.
    """
    for name, v in (("n_users", n_users), ("n_items", n_items), ("n_concepts", n_concepts),
                    ("community_count", community_count), ("n_attributes", n_attributes)):
        if v < 1:
            raise ConfigError(f"{name} must be >= 1, got {v}")
    if community_count > n_users:
        raise ConfigError(f"community_count ({community_count}) exceeds n_users ({n_users})")
    if community_count > n_items:
        raise ConfigError(f"community_count ({community_count}) exceeds n_items ({n_items})")
    for name, p in (("affinity", affinity), ("concept_purity", concept_purity), ("noise", noise)):
        if not 0 <= p <= 1:
            raise ConfigError(f"{name} must lie in [0, 1]")
    lo_c, hi_c = concepts_per_item
    if not 1 <= lo_c <= hi_c:
        raise ConfigError("concepts_per_item must satisfy 1 <= low <= high")
    if ratings_per_user <= 0:
        raise ConfigError("ratings_per_user must be positive")

    rng = np.random.default_rng(seed)
    users = _ids("u", n_users)
    items = _ids("i", n_items)
    concepts = _ids("c", n_concepts)
    C = community_count

    user_comm = rng.permutation(np.arange(n_users) % C)
    item_comm = rng.permutation(np.arange(n_items) % C)

    # concept slices; with fewer concepts than communities the slices wrap around
    if n_concepts >= C:
        slices = [[concepts[k] for k in range(n_concepts) if k % C == c] for c in range(C)]
    else:
        slices = [[concepts[c % n_concepts]] for c in range(C)]

    catalog: dict[str, frozenset[str]] = {}
    for j, item in enumerate(items):
        size = int(rng.integers(lo_c, hi_c + 1))
        home = slices[item_comm[j]]
        chosen: set[str] = {home[0]} if anchor_concept else set()
        for _ in range(size - len(chosen)):
            if rng.random() < concept_purity:
                chosen.add(home[int(rng.integers(len(home)))])
            else:
                chosen.add(concepts[int(rng.integers(n_concepts))])
        catalog[item] = frozenset(chosen)

    # community opinion of every item: home items liked, the rest not
    opinion = np.where(
        item_comm[None, :] == np.arange(C)[:, None],
        rng.choice([4, 5], size=(C, n_items), p=[0.4, 0.6]),
        rng.choice([1, 2, 3], size=(C, n_items), p=[0.3, 0.4, 0.3]),
    )

    pools = [np.flatnonzero(item_comm == c) for c in range(C)]
    others = [np.flatnonzero(item_comm != c) for c in range(C)]
    records: list[RatingRecord] = []
    for k, user in enumerate(users):
        c = int(user_comm[k])
        rate = ratings_per_user
        if activity_spread > 0:
            rate *= rng.lognormal(-activity_spread**2 / 2, activity_spread)
        r = min(n_items, max(2, int(rng.poisson(rate))))
        n_home = min(len(pools[c]), int(rng.binomial(r, affinity)))
        n_away = min(len(others[c]), r - n_home)
        picked = list(rng.choice(pools[c], size=n_home, replace=False)) if n_home else []
        if n_away:
            picked += list(rng.choice(others[c], size=n_away, replace=False))
        for j in sorted(int(x) for x in picked):
            overall = int(opinion[c, j])
            if rng.random() < noise:
                overall += int(rng.choice([-1, 1]))
            overall = min(5, max(1, overall))
            for a in range(1, n_attributes):
                jitter = int(rng.choice([-1, 0, 1], p=[0.2, 0.6, 0.2]))
                records.append(RatingRecord(user, items[j], a, float(min(5, max(1, overall + jitter)))))
            records.append(RatingRecord(user, items[j], n_attributes, float(overall)))

    store = RatingsStore(records, scale=RatingScale(1, 5), n_attributes=n_attributes)
    members = [frozenset(u for u, cu in zip(users, user_comm) if cu == c) for c in range(C)]
    return SyntheticDataset(
        store=store,
        catalog=ConceptCatalog(catalog),
        community={u: int(c) for u, c in zip(users, user_comm)},
        item_community={it: int(c) for it, c in zip(items, item_comm)},
        planted={it: members[int(c)] for it, c in zip(items, item_comm)},
        params=dict(
            n_users=n_users, n_items=n_items, n_concepts=n_concepts,
            community_count=community_count, seed=seed, ratings_per_user=ratings_per_user,
            activity_spread=activity_spread, affinity=affinity,
            concepts_per_item=list(concepts_per_item), concept_purity=concept_purity,
            anchor_concept=anchor_concept, noise=noise, n_attributes=n_attributes,
        ),
    )
