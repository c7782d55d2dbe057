"""Customer co-rating graph and the centrality measures used to rank influence."""

from __future__ import annotations

import io
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import ConfigError, GraphError, ParseError
from .ingest import RatingsStore

MEASURES = ("degree", "closeness", "betweenness")

# Sources per work unit for the BFS-based measures.  Fixed so that the
# floating-point summation order does not depend on the worker count.
CHUNK = 64


class SocialGraph:
    """Undirected graph over customer ids with positive integer edge weights.

    Nodes are kept in ascending id order; ``adjacency[i]`` lists the
    neighbour indices of ``nodes[i]`` in ascending order.
    """

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str, int]] = ()):
        self.nodes: tuple[str, ...] = tuple(sorted(set(nodes)))
        self.index = {v: i for i, v in enumerate(self.nodes)}
        weights: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if w < 1:
                raise ValueError(f"edge ({u!r}, {v!r}) has non-positive weight {w}")
            try:
                i, j = self.index[u], self.index[v]
            except KeyError as exc:
                raise ValueError(f"edge endpoint {exc.args[0]!r} is not a node") from None
            key = (i, j) if i < j else (j, i)
            if key in weights:
                raise ValueError(f"duplicate edge ({u!r}, {v!r})")
            weights[key] = int(w)
        self._weights = weights
        adj: list[list[int]] = [[] for _ in self.nodes]
        for i, j in weights:
            adj[i].append(j)
            adj[j].append(i)
        for row in adj:
            row.sort()
        self.adjacency = adj

    @classmethod
    def _from_indexed(cls, nodes: Sequence[str], rows: np.ndarray, cols: np.ndarray, w: np.ndarray):
        """Fast path: ``nodes`` already sorted and unique, ``rows < cols``."""
        g = cls.__new__(cls)
        g.nodes = tuple(nodes)
        g.index = {v: i for i, v in enumerate(g.nodes)}
        g._weights = dict(zip(zip(rows.tolist(), cols.tolist()), w.tolist()))
        adj: list[list[int]] = [[] for _ in g.nodes]
        for i, j in zip(rows.tolist(), cols.tolist()):
            adj[i].append(j)
            adj[j].append(i)
        for row in adj:
            row.sort()
        g.adjacency = adj
        return g

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self._weights)

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbors(self, v: str) -> list[str]:
        return [self.nodes[j] for j in self.adjacency[self.index[v]]]

    def degree(self, v: str) -> int:
        return len(self.adjacency[self.index[v]])

    def has_edge(self, u: str, v: str) -> bool:
        i, j = self.index[u], self.index[v]
        return (min(i, j), max(i, j)) in self._weights

    def weight(self, u: str, v: str) -> int:
        i, j = self.index[u], self.index[v]
        return self._weights[min(i, j), max(i, j)]

    def edges(self) -> list[tuple[str, str, int]]:
        """Edges as (u, v, weight) with u < v, sorted."""
        return sorted((self.nodes[i], self.nodes[j], w) for (i, j), w in self._weights.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges() == other.edges()

    def __repr__(self) -> str:
        return f"SocialGraph(n={self.n}, m={self.m})"


def build_co_rating_graph(
    store: RatingsStore, agreement_attribute: int = 3, min_agreements: int = 1
) -> SocialGraph:
    """Connect customers who gave identical scores to at least ``min_agreements`` common items.

    Edge weight is the number of such agreement items.  Every user in the
    store becomes a node, isolated or not.
    """
    if agreement_attribute not in store.attributes:
        raise ConfigError(
            f"agreement attribute {agreement_attribute} not in [1..{store.n_attributes}]"
        )
    if min_agreements < 1:
        raise ConfigError("min_agreements must be a positive integer")
    users = store.users
    uidx = {u: i for i, u in enumerate(users)}
    # one column per (item, score) pair: two users share a column iff they agree on that item
    col_of: dict[tuple[str, float], int] = {}
    rows: list[int] = []
    cols: list[int] = []
    for user in users:
        for item, score in store.user_ratings(user, agreement_attribute).items():
            c = col_of.setdefault((item, score), len(col_of))
            rows.append(uidx[user])
            cols.append(c)
    if not rows:
        return SocialGraph(users)
    incidence = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(len(users), len(col_of))
    )
    counts = sparse.triu(incidence @ incidence.T, k=1).tocoo()
    keep = counts.data >= min_agreements
    r, c, w = counts.row[keep], counts.col[keep], counts.data[keep]
    order = np.lexsort((c, r))
    return SocialGraph._from_indexed(users, r[order], c[order], w[order].astype(np.int64))


def density(g: SocialGraph) -> float:
    return density_from_counts(g.n, g.m)


def density_from_counts(n: int, m: int) -> float:
    """2m / (n(n-1)) for an undirected simple graph."""
    if n < 2:
        raise GraphError(f"density undefined for n={n} (< 2 nodes)")
    return 2.0 * m / (n * (n - 1))


@dataclass
class CentralityScores:
    measure: str
    scores: dict[str, float]
    normalized: bool = False

    def __getitem__(self, node: str) -> float:
        return self.scores[node]

    def top(self, k: int) -> list[tuple[str, float]]:
        return [(v, self.scores[v]) for v in rank_nodes(self.scores)[:k]]


def degree_centrality(g: SocialGraph, normalized: bool = True) -> CentralityScores:
    if normalized:
        scale = 1.0 / (g.n - 1) if g.n > 1 else 0.0
        scores = {v: len(g.adjacency[i]) * scale for i, v in enumerate(g.nodes)}
    else:
        scores = {v: float(len(g.adjacency[i])) for i, v in enumerate(g.nodes)}
    return CentralityScores("degree", scores, normalized)


def _bfs_distances(adj: Sequence[Sequence[int]], s: int) -> tuple[int, int]:
    """(reachable count including s, sum of hop distances) from source s."""
    dist = {s: 0}
    queue = deque([s])
    total = 0
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for w in adj[v]:
            if w not in dist:
                dist[w] = dv
                total += dv
                queue.append(w)
    return len(dist), total


def _closeness_chunk(adj, sources, n):
    out = []
    for s in sources:
        reach, total = _bfs_distances(adj, s)
        if total == 0 or n < 2:
            out.append(0.0)
        else:
            c = reach - 1
            out.append((c / total) * (c / (n - 1)))
    return out


def _brandes_chunk(adj, sources, n):
    """Summed dependency contributions of the given sources (Brandes accumulation)."""
    bc = [0.0] * n
    for s in sources:
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v] + 1
            sv = sigma[v]
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sv
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc


def _run_chunks(fn, g: SocialGraph, workers: int | None):
    chunks = [range(i, min(i + CHUNK, g.n)) for i in range(0, g.n, CHUNK)]
    if workers and workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, g.adjacency, list(c), g.n) for c in chunks]
            return [f.result() for f in futures]
    return [fn(g.adjacency, c, g.n) for c in chunks]


def closeness_centrality(g: SocialGraph, workers: int | None = None) -> CentralityScores:
    """Hop-count closeness, scaled by component size so disconnected graphs compare fairly.

    For a node reaching ``c - 1`` others at total distance ``D`` in a graph of
    ``n`` nodes the score is ``(c-1)/D * (c-1)/(n-1)``; isolated nodes score 0.
    """
    values: list[float] = []
    for part in _run_chunks(_closeness_chunk, g, workers):
        values.extend(part)
    return CentralityScores("closeness", dict(zip(g.nodes, values)), normalized=True)


def betweenness_centrality(g: SocialGraph, workers: int | None = None) -> CentralityScores:
    """Unnormalized shortest-path betweenness, each unordered pair counted once."""
    total = [0.0] * g.n
    for part in _run_chunks(_brandes_chunk, g, workers):
        for i, x in enumerate(part):
            total[i] += x
    # every unordered (s, t) pair was visited from both ends
    return CentralityScores("betweenness", {v: total[i] / 2.0 for i, v in enumerate(g.nodes)})


def centrality(g: SocialGraph, measure: str, workers: int | None = None) -> CentralityScores:
    if measure == "degree":
        return degree_centrality(g, normalized=True)
    if measure == "closeness":
        return closeness_centrality(g, workers=workers)
    if measure == "betweenness":
        return betweenness_centrality(g, workers=workers)
    raise ConfigError(f"unknown centrality measure {measure!r}; expected one of {MEASURES}")


def _tie_key(x: float) -> float:
    # 12 significant digits: values equal up to accumulation rounding
    # (symmetric nodes under Brandes) must tie and fall back to id order
    return float(f"{x:.12g}")


def rank_nodes(scores: dict[str, float]) -> list[str]:
    return sorted(scores, key=lambda v: (-_tie_key(scores[v]), v))


def influence_ranking(
    g: SocialGraph, measure: str | CentralityScores = "degree", workers: int | None = None
) -> list[str]:
    """Nodes by decreasing centrality, ties broken by ascending id."""
    if g.n == 0:
        return []
    scores = measure if isinstance(measure, CentralityScores) else centrality(g, measure, workers)
    return rank_nodes(scores.scores)


# -- text formats ------------------------------------------------------------


def write_edge_list(g: SocialGraph, target: str | os.PathLike | IO[str]) -> None:
    """Write ``u,v,weight`` lines under a ``# nodes: <n>`` header.

    Isolated nodes are listed as ``# isolated: <id>`` comment lines so they
    survive a round trip.
    """
    buf = io.StringIO()
    buf.write(f"# nodes: {g.n}\n")
    for i, v in enumerate(g.nodes):
        if not g.adjacency[i]:
            buf.write(f"# isolated: {v}\n")
    buf.write("u,v,weight\n")
    for u, v, w in g.edges():
        buf.write(f"{u},{v},{w}\n")
    _emit(buf.getvalue(), target)


def read_edge_list(source: str | os.PathLike | IO[str]) -> SocialGraph:
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, os.PathLike)) else source.read()
    declared = None
    nodes: set[str] = set()
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("nodes:"):
                try:
                    declared = int(body[len("nodes:"):])
                except ValueError:
                    raise ParseError("bad node-count header", line=lineno) from None
            elif body.startswith("isolated:"):
                nodes.add(body[len("isolated:"):].strip())
            continue
        if line == "u,v,weight":
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"expected u,v,weight, got {line!r}", line=lineno)
        try:
            w = int(parts[2])
        except ValueError:
            raise ParseError(f"non-integer weight {parts[2]!r}", line=lineno) from None
        nodes.update(parts[:2])
        edges.append((parts[0], parts[1], w))
    g = SocialGraph(nodes, edges)
    if declared is not None and declared != g.n:
        raise ParseError(f"header declares {declared} nodes but {g.n} found")
    return g


def write_centrality(
    scores: CentralityScores | Iterable[CentralityScores], target: str | os.PathLike | IO[str]
) -> None:
    """``node,measure,score`` lines, highest score first within each measure."""
    if isinstance(scores, CentralityScores):
        scores = [scores]
    buf = io.StringIO()
    buf.write("node,measure,score\n")
    for s in scores:
        for v in rank_nodes(s.scores):
            buf.write(f"{v},{s.measure},{s.scores[v]!r}\n")
    _emit(buf.getvalue(), target)


def _emit(text: str, target) -> None:
    if isinstance(target, (str, os.PathLike)):
        Path(target).write_text(text, encoding="utf-8")
    else:
        target.write(text)
