"""Independent reference implementations used as test oracles.

Everything here works from raw record lists / edge lists with the most
literal algorithm available (explicit sums, exhaustive enumeration, exact
fractions) and shares no code with the package beyond plain data types.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict, deque
from fractions import Fraction


# -- ratings -----------------------------------------------------------------


def ratings_table(records):
    """(user, item, attribute) -> score, last write wins."""
    table = {}
    for r in records:
        table[r.user, r.item, r.attribute] = r.score
    return table


def user_mean(table, user, attribute):
    scores = [s for (u, _, a), s in table.items() if u == user and a == attribute]
    return sum(scores) / len(scores)


def user_means(table):
    """(user, attribute) -> mean, one user_mean call per key."""
    return {(u, a): user_mean(table, u, a) for (u, _, a) in table}


def attribute_similarity(table, users, i, j, attribute, means=None):
    """Per-attribute adjusted correlation, written out term by term."""
    num = 0.0
    left = 0.0
    right = 0.0
    for u in users:
        if (u, i, attribute) in table and (u, j, attribute) in table:
            mean = means[u, attribute] if means else user_mean(table, u, attribute)
            a = table[u, i, attribute] - mean
            b = table[u, j, attribute] - mean
            num = num + a * b
            left = left + a * a
            right = right + b * b
    if left == 0 or right == 0:
        return 0.0
    return num / (math.sqrt(left) * math.sqrt(right))


def blended_similarity(table, users, i, j, weights, means=None):
    top = 0.0
    for a, w in enumerate(weights, start=1):
        top += w * attribute_similarity(table, users, i, j, a, means)
    return top / sum(weights)


def concept_overlap(concepts_i, concepts_j):
    common = 0
    total = 0
    for c in sorted(set(concepts_i) | set(concepts_j)):
        total += 1
        if c in concepts_i and c in concepts_j:
            common += 1
    return common / total


def hybrid_similarity(table, users, catalog, i, j, weights, w_cf, w_sem, means=None):
    return w_cf * blended_similarity(table, users, i, j, weights, means) + w_sem * concept_overlap(catalog[i], catalog[j])


def pearson(xs, ys):
    """Textbook sample Pearson correlation; None when undefined."""
    n = len(xs)
    if n < 2:
        return None
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def user_pearson(table, u, v, attribute):
    items = sorted({i for (w, i, a) in table if w == u and a == attribute}
                   & {i for (w, i, a) in table if w == v and a == attribute})
    r = pearson([table[u, i, attribute] for i in items], [table[v, i, attribute] for i in items])
    return 0.0 if r is None else r


def baseline_predictions(table, users, product, k, attribute, low, high):
    """Weighted-mean CF prediction for every non-rater, computed directly."""
    raters = sorted(u for u in users if (u, product, attribute) in table)
    out = {}
    for c in users:
        if c in raters:
            continue
        if not any(w == c and a == attribute for (w, _, a) in table):
            continue
        sims = []
        for r in raters:
            s = user_pearson(table, c, r, attribute)
            if s > 0:
                sims.append((s, r))
        if not sims:
            continue
        sims.sort(key=lambda t: (-t[0], t[1]))
        sims = sims[:k]
        num = 0.0
        den = 0.0
        for s, r in sims:
            num += s * (table[r, product, attribute] - user_mean(table, r, attribute))
            den += s
        pred = user_mean(table, c, attribute) + num / den
        out[c] = min(high, max(low, pred))
    return out


# -- graphs ------------------------------------------------------------------


def co_rating_edges(records, attribute, min_agreements):
    """Pairwise double loop over users counting exact-score agreements."""
    table = ratings_table(records)
    by_user = defaultdict(dict)
    for (u, i, a), s in table.items():
        if a == attribute:
            by_user[u][i] = s
    users = sorted({u for (u, _, _) in table})
    edges = []
    for x in range(len(users)):
        for y in range(x + 1, len(users)):
            u, v = users[x], users[y]
            agree = sum(1 for i, s in by_user[u].items() if i in by_user[v] and by_user[v][i] == s)
            if agree >= min_agreements:
                edges.append((u, v, agree))
    return users, edges


def adjacency(nodes, edges):
    adj = {v: set() for v in nodes}
    for u, v, *_ in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def degree_counts(nodes, edges):
    deg = {v: 0 for v in nodes}
    for u, v, *_ in edges:
        deg[u] += 1
        deg[v] += 1
    return deg


def bfs_all(adj, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                q.append(y)
    return dist


def closeness(nodes, edges):
    """Exact component-scaled closeness from all-pairs BFS."""
    adj = adjacency(nodes, edges)
    n = len(nodes)
    out = {}
    for v in nodes:
        dist = bfs_all(adj, v)
        total = sum(dist.values())
        reach = len(dist) - 1
        if total == 0 or n < 2:
            out[v] = Fraction(0)
        else:
            out[v] = Fraction(reach, total) * Fraction(reach, n - 1)
    return out


def all_shortest_paths(adj, s, t):
    dist = bfs_all(adj, s)
    if t not in dist:
        return []
    paths = []

    def extend(path):
        x = path[-1]
        if x == t:
            paths.append(list(path))
            return
        for y in sorted(adj[x]):
            if dist.get(y) == dist[x] + 1 and len(path) <= dist[t]:
                path.append(y)
                extend(path)
                path.pop()

    extend([s])
    return [p for p in paths if len(p) == dist[t] + 1]


def betweenness(nodes, edges):
    """Exact betweenness by enumerating every shortest path of every unordered pair."""
    adj = adjacency(nodes, edges)
    score = {v: Fraction(0) for v in nodes}
    for s, t in itertools.combinations(sorted(nodes), 2):
        paths = all_shortest_paths(adj, s, t)
        if not paths:
            continue
        for v in nodes:
            if v in (s, t):
                continue
            through = sum(1 for p in paths if v in p[1:-1])
            if through:
                score[v] += Fraction(through, len(paths))
    return score


def rank(scores):
    return sorted(scores, key=lambda v: (-scores[v], v))


# -- recommendation ----------------------------------------------------------


def profile_mass(weights, concepts):
    return sum(w for c, w in weights.items() if c in concepts)


def sort_then_filter(order_scores, profiles, concepts, threshold, budget, max_results=None):
    """Sort everyone by influence, cut to the budget, filter by profile score."""
    ranked = rank(order_scores)
    limit = min(len(ranked), math.ceil(budget * len(ranked) - 1e-9))
    accepted = []
    examined = 0
    for v in ranked[:limit]:
        examined += 1
        weights = profiles.get(v, {})
        if weights and profile_mass(weights, concepts) >= threshold:
            accepted.append(v)
            if max_results is not None and len(accepted) == max_results:
                break
    return accepted, examined


def profile_weights(table, catalog, user, liking_threshold, attribute):
    """Accumulate liked scores per concept by hand, then divide by the total."""
    acc = {}
    for (u, i, a), s in sorted(table.items()):
        if u != user or a != attribute or s < liking_threshold or i not in catalog:
            continue
        for c in catalog[i]:
            acc[c] = acc.get(c, 0.0) + s
    total = sum(acc.values())
    return {c: w / total for c, w in acc.items()} if total else {}
