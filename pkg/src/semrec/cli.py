"""``semrec`` command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .config import EngineConfig, load_config
from .errors import (
    ConfigError, EmptyNeighborhoodError, GraphError, LookupFailure, ParseError, SemrecError,
)
from .evaluation import (
    BASELINE,
    SEMANTIC,
    choose_query_items,
    run_benchmark,
)
from .graph import (
    MEASURES,
    build_co_rating_graph,
    centrality,
    density,
    rank_nodes,
    read_edge_list,
    write_centrality,
    write_edge_list,
)
from .ingest import (
    ConceptCatalog,
    RatingsStore,
    parse_concepts,
    parse_ratings,
    validate,
    write_concepts,
    write_ratings,
)
from .profile import build_profiles, write_profiles
from .recommend import (
    TRAVERSALS,
    RecommendationQuery,
    UserSimilarityMatrix,
    baseline_cf_recommend,
    recommend_customers,
)
from .similarity import SimilarityEngine, write_similarity_matrix
from .synthetic import generate_synthetic

log = logging.getLogger("semrec")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
DEFAULT_WORKSPACE = "semrec-workspace"
GRAPH_KEYS = ("agreement_attribute", "min_agreements")


class UsageError(SemrecError):
    pass


# -- workspace ---------------------------------------------------------------


@dataclass
class Workspace:
    path: Path
    config: EngineConfig
    store: RatingsStore
    catalog: ConceptCatalog
    graph: object

    @property
    def profiles(self):
        if not hasattr(self, "_profiles"):
            self._profiles = build_profiles(
                self.store, self.catalog, self.config.liking_threshold, self.config.overall_attribute
            )
        return self._profiles


def _workspace_path(arg: str | None) -> Path:
    return Path(arg or os.environ.get("SEMREC_WORKSPACE") or DEFAULT_WORKSPACE)


def save_workspace(path: Path, config: EngineConfig, store: RatingsStore, catalog: ConceptCatalog):
    path.mkdir(parents=True, exist_ok=True)
    graph = build_co_rating_graph(store, config.agreement, config.min_agreements)
    profiles = build_profiles(store, catalog, config.liking_threshold, config.overall_attribute)
    write_ratings(store, path / "ratings.csv")
    write_concepts(catalog, path / "concepts.csv")
    write_edge_list(graph, path / "graph.csv")
    write_profiles(profiles, path / "profiles.csv")
    (path / "config.json").write_text(config.to_json(), encoding="utf-8")
    manifest = {
        "semrec_version": __version__,
        "config_hash": config.digest,
        "files": {
            "ratings": "ratings.csv",
            "concepts": "concepts.csv",
            "graph": "graph.csv",
            "profiles": "profiles.csv",
            "config": "config.json",
        },
        "counts": {
            "users": len(store.users),
            "items": len(store.items),
            "records": len(store),
            "annotated_items": len(catalog),
            "nodes": graph.n,
            "edges": graph.m,
        },
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return graph


def load_workspace(path: Path, config_override: str | None = None) -> Workspace:
    if not (path / "manifest.json").is_file():
        raise UsageError(f"no workspace at {path} (run `semrec ingest` first)")
    manifest = json.loads((path / "manifest.json").read_text(encoding="utf-8"))
    stored = EngineConfig.from_dict(
        json.loads((path / "config.json").read_text(encoding="utf-8")), require=()
    )
    if stored.digest != manifest.get("config_hash"):
        log.warning("workspace config does not match its manifest hash")
    config = load_config(config_override) if config_override else stored
    store = parse_ratings(
        path / "ratings.csv", scale=config.rating_scale, n_attributes=config.n_attributes,
        attribute_names=config.attributes,
    )
    catalog = parse_concepts(path / "concepts.csv")
    if all(getattr(config, k) == getattr(stored, k) for k in GRAPH_KEYS):
        graph = read_edge_list(path / "graph.csv")
    else:
        graph = build_co_rating_graph(store, config.agreement, config.min_agreements)
    return Workspace(path, config, store, catalog, graph)


def _echo_config(config: EngineConfig, keys, out) -> None:
    d = config.to_dict()
    print("config: " + " ".join(f"{k}={json.dumps(d[k])}" for k in keys), file=out)


# -- commands ----------------------------------------------------------------


def cmd_ingest(args, out) -> int:
    config = load_config(args.config) if args.config else EngineConfig()
    store = parse_ratings(
        args.ratings, scale=config.rating_scale, n_attributes=config.n_attributes,
        attribute_names=config.attributes,
    )
    catalog = parse_concepts(args.concepts)
    report = validate(store, catalog)
    path = _workspace_path(args.workspace)
    graph = save_workspace(path, config, store, catalog)
    print(report.summary(), file=out)
    print(f"graph: nodes={graph.n} edges={graph.m}", file=out)
    print(f"workspace written to {path}", file=out)
    return EXIT_OK


def cmd_analyze(args, out) -> int:
    ws = load_workspace(_workspace_path(args.workspace), args.config)
    g = ws.graph
    print(f"nodes: {g.n}", file=out)
    print(f"edges: {g.m}", file=out)
    try:
        print(f"density: {density(g):.4f}", file=out)
    except GraphError as exc:
        print(f"density: n/a ({exc})", file=out)
    measures = args.measures.split(",") if args.measures else list(MEASURES)
    for m in measures:
        if m not in MEASURES:
            raise ConfigError(f"unknown measure {m!r}; expected one of {MEASURES}")
    rows = []
    for m in measures:
        scores = centrality(g, m, workers=args.workers)
        print(f"top {args.top} by {m}:", file=out)
        for rank, v in enumerate(rank_nodes(scores.scores)[: args.top], start=1):
            print(f"  {rank:>3}  {v}  {scores.scores[v]:.6f}", file=out)
        rows.append(scores)
    if args.centrality_out:
        write_centrality(rows, args.centrality_out)
    if args.similarity_out:
        engine = SimilarityEngine(ws.store, ws.catalog, ws.config.weights, ws.config.hybrid_weights)
        write_similarity_matrix(engine.matrix(), args.similarity_out)
        print(f"similarity matrix written to {args.similarity_out}", file=out)
    return EXIT_OK


def _query_from(args, config: EngineConfig) -> tuple[EngineConfig, RecommendationQuery]:
    config = config.replace(
        threshold=args.threshold,
        influence_measure=args.measure,
        coverage_budget=args.budget,
        max_results=args.max_results,
        traversal=args.traversal,
    )
    q = RecommendationQuery(
        args.item,
        threshold=config.threshold,
        influence_measure=config.influence_measure,
        coverage_budget=config.coverage_budget,
        max_results=config.max_results,
        traversal=config.traversal,
    )
    return config, q


def cmd_recommend(args, out) -> int:
    ws = load_workspace(_workspace_path(args.workspace), args.config)
    config, q = _query_from(args, ws.config)
    res = recommend_customers(ws.graph, ws.profiles, ws.catalog, q, comparison=config.profile_comparison)
    if args.format == "json":
        rec = res.to_record()
        rec["scores"] = {c: res.scores[c] for c in res.accepted}
        rec["config"] = {k: config.to_dict()[k] for k in ("threshold", "influence_measure", "coverage_budget", "max_results", "traversal")}
        print(json.dumps(rec, sort_keys=True), file=out)
        return EXIT_OK
    _echo_config(config, ("threshold", "influence_measure", "coverage_budget", "max_results", "traversal"), out)
    print(f"item: {res.product}", file=out)
    print(f"accepted: {len(res.accepted)}", file=out)
    for c, s in res.accepted_scores:
        print(f"  {c}  {s:.6f}", file=out)
    print(f"examined nodes: {res.examined} of {ws.graph.n}", file=out)
    print(f"elapsed: {res.elapsed * 1000:.1f} ms", file=out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    ws = load_workspace(_workspace_path(args.workspace), args.config)
    config, q = _query_from(args, ws.config)
    overall = ws.store.n_attributes
    owners = set(ws.store.item_ratings(args.item, overall)) if ws.store.has_item(args.item) else set()
    res = recommend_customers(
        ws.graph, ws.profiles, ws.catalog, q, exclude=owners, comparison=config.profile_comparison
    )
    try:
        liked, preds = baseline_cf_recommend(
            ws.store, args.item, config.neighborhood_size, config.liking_threshold, overall,
            similarities=UserSimilarityMatrix(ws.store, overall),
        )
        baseline_error = None
    except EmptyNeighborhoodError as exc:
        liked, preds, baseline_error = [], {}, str(exc)
    if q.max_results is not None:
        liked = liked[: q.max_results]
    _echo_config(config, ("threshold", "influence_measure", "coverage_budget", "neighborhood_size", "liking_threshold"), out)
    print(f"item: {args.item} (existing raters excluded: {len(owners)})", file=out)
    print(f"{SEMANTIC}: {len(res.accepted)} customers, examined {res.examined}", file=out)
    for c, s in res.accepted_scores:
        print(f"  {c}  {s:.6f}", file=out)
    if baseline_error:
        print(f"{BASELINE}: unavailable ({baseline_error})", file=out)
    else:
        print(f"{BASELINE}: {len(liked)} customers, predictions {len(preds)}", file=out)
    for c in liked:
        print(f"  {c}  {preds[c].score:.4f}  (k={preds[c].neighbors})", file=out)
    common = set(res.accepted) & set(liked)
    print(f"overlap: {len(common)}", file=out)
    return EXIT_OK


def _read_queries(path: str) -> list[str]:
    items = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            items.append(line.split(",")[0].strip())
    if not items:
        raise UsageError(f"{path}: no query items")
    return items


def cmd_evaluate(args, out) -> int:
    if args.synthetic:
        config = load_config(args.config) if args.config else EngineConfig()
        config = config.replace(seed=args.seed)
        data = generate_synthetic(args.users, args.items, args.concepts, args.communities, seed=config.seed)
        store, catalog = data.store, data.catalog
        queries = (
            _read_queries(args.queries) if args.queries
            else choose_query_items(store, args.n_queries, seed=config.seed)
        )
        info = {"source": "synthetic", **data.params}
    else:
        ws = load_workspace(_workspace_path(args.workspace), args.config)
        config = ws.config.replace(seed=args.seed)
        store, catalog = ws.store, ws.catalog
        if not args.queries:
            raise UsageError("evaluate needs --queries FILE or --synthetic")
        queries = _read_queries(args.queries)
        info = {"source": str(ws.path)}
    config = config.replace(
        threshold=args.threshold, influence_measure=args.measure, coverage_budget=args.budget
    )
    report = run_benchmark(store, catalog, queries, config, timing=args.timing, dataset_info=info)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.format in ("text", "both"):
        (outdir / "report.txt").write_text(report.to_text(), encoding="utf-8")
        written.append(outdir / "report.txt")
    if args.format in ("json", "both"):
        (outdir / "report.json").write_text(report.to_json(), encoding="utf-8")
        written.append(outdir / "report.json")
    print(report.to_text(), end="", file=out)
    for p in written:
        print(f"wrote {p}", file=out)
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def _add_query_flags(p):
    p.add_argument("item", help="product id to recommend")
    p.add_argument("--threshold", type=float, help="minimum profile/product score to accept a customer")
    p.add_argument("--measure", choices=MEASURES, help="influence (centrality) measure")
    p.add_argument("--budget", type=float, help="max fraction of customers examined, in (0, 1]")
    p.add_argument("--max-results", type=int, dest="max_results")
    p.add_argument("--traversal", choices=TRAVERSALS, help="influence-order scan or neighbour expansion")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semrec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"semrec {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-w", "--workspace", help="workspace directory (default: $SEMREC_WORKSPACE or ./semrec-workspace)")
        p.add_argument("-c", "--config", help="engine configuration JSON")

    p = sub.add_parser("ingest", help="parse, validate and store ratings + concepts")
    p.add_argument("ratings")
    p.add_argument("concepts")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="network statistics and top customers per centrality")
    common(p)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--measures", help=f"comma-separated subset of {','.join(MEASURES)}")
    p.add_argument("--workers", type=int, default=None, help="processes for closeness/betweenness")
    p.add_argument("--centrality-out", help="write node,measure,score lines here")
    p.add_argument("--similarity-out", help="write item_i,item_j,score hybrid similarities here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("recommend", help="semantic-social recommendation for one product")
    common(p)
    _add_query_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("compare", help="semantic-social vs CF baseline for one product")
    common(p)
    _add_query_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("evaluate", help="holdout precision/recall benchmark, both methods")
    common(p)
    p.add_argument("--queries", help="file with one query item id per line")
    p.add_argument("--synthetic", action="store_true", help="evaluate on a generated dataset")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--users", type=int, default=500)
    p.add_argument("--items", type=int, default=200)
    p.add_argument("--concepts", type=int, default=40)
    p.add_argument("--communities", type=int, default=5)
    p.add_argument("--n-queries", type=int, default=10, dest="n_queries")
    p.add_argument("--threshold", type=float)
    p.add_argument("--measure", choices=MEASURES)
    p.add_argument("--budget", type=float)
    p.add_argument("--out", default="semrec-report", help="output directory for report files")
    p.add_argument("--format", choices=("text", "json", "both"), default="both")
    p.add_argument("--timing", action="store_true", help="include wall times (reports stop being reproducible)")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args, out)
    except (ParseError, ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LookupFailure, SemrecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
