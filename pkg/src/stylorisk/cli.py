"""Command-line interface.

One executable, six subcommands: features, ingest, assess, defend, eval,
db-stats.  Exit codes: 0 success, 1 domain error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from .config import PipelineConfig, load_config, override
from .defense import apply_defense, build_suggestions
from .errors import StyloError
from .evaluation import (
    DefenseEvalConfig,
    OpenWorldScenario,
    build_targeted_scenario,
    load_dataset,
    open_world_topk_vs_candidates,
    run_defense_eval,
    run_open_world,
    run_targeted,
    write_plot_csv,
)
from .pipeline import assess
from .provider import make_provider
from .store import Article, ProfileStore
from .stylometry import (
    AGGREGATED_FEATURES,
    FEATURE_LABELS,
    compute_features,
    format_value,
    profile_to_dict,
)


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # On the subcommand side all defaults are SUPPRESS so values parsed
    # by the main parser are not clobbered by subparser defaults.
    d = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--config", metavar="PATH", help="JSON config file", **d)
    parser.add_argument("--provider", choices=("stub", "http"), help="provider kind", **d)
    parser.add_argument("--store", metavar="PATH", help="profile store directory", **d)
    parser.add_argument(
        "--output", choices=("json", "table"), help="output format",
        **(d if suppress else {"default": "table"}),
    )
    parser.add_argument("--seed", type=int, help="seed for sampling steps", **d)
    parser.add_argument("--jobs", type=int, help="parallelism for batch commands", **d)
    parser.add_argument("--fixtures", metavar="PATH", help="stub web-search fixtures (JSON)", **d)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stylorisk",
        description="Assess and mitigate authorship deanonymization risk for text articles.",
    )
    _add_global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)

    sub = parser.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

    p_features = sub.add_parser(
        "features", parents=[common], help="print the stylometric profile of a text file"
    )
    p_features.add_argument("input", help="text file to profile")

    p_ingest = sub.add_parser(
        "ingest", parents=[common], help="warm up the store from a CSV/JSONL dataset"
    )
    p_ingest.add_argument("dataset", help="dataset file (CSV or JSONL)")
    p_ingest.add_argument("--format", choices=("csv", "jsonl"), default=None)
    p_ingest.add_argument(
        "--exclude-authors", default="", metavar="NAMES",
        help="comma-separated author names to omit during ingestion",
    )

    p_assess = sub.add_parser(
        "assess", parents=[common], help="run the four-stage risk assessment on one article"
    )
    p_assess.add_argument("article", help="article file (.json with article fields, else raw text)")
    p_assess.add_argument("--strategy", choices=("es", "lda", "sala"), default=None)
    p_assess.add_argument("--candidates", type=int, default=None, help="candidate count (default 20)")
    p_assess.add_argument("--mode", choices=("db", "zero_shot"), default=None)

    p_defend = sub.add_parser(
        "defend", parents=[common], help="rewrite an article to reduce identifiability"
    )
    p_defend.add_argument("article", help="article file")
    p_defend.add_argument("--mode", choices=("rule_based", "provider"), default="rule_based")
    p_defend.add_argument("--strategy", choices=("es", "lda", "sala"), default=None)
    p_defend.add_argument("--candidates", type=int, default=None, help="candidate count (default 20)")
    p_defend.add_argument("--top-features", type=int, default=3, dest="top_features")
    p_defend.add_argument(
        "--baseline", action="store_true",
        help="provider mode: plain paraphrase instead of guided recompose",
    )

    p_eval = sub.add_parser(
        "eval", parents=[common], help="run an evaluation scenario file"
    )
    p_eval.add_argument("scenario", help="scenario JSON file")
    p_eval.add_argument("--strategy", choices=("es", "lda", "sala"), default=None)
    p_eval.add_argument("--out", metavar="PATH", help="write the JSON report (or sweep CSV) here")

    sub.add_parser("db-stats", parents=[common], help="print store manifest counts")

    return parser


def _build_config(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    config = override(
        config,
        store_path=args.store,
        seed=args.seed,
        jobs=args.jobs,
        provider_kind=args.provider,
        provider_fixtures_path=args.fixtures,
    )
    strategy = getattr(args, "strategy", None)
    if strategy:
        config = override(config, strategy=strategy)
    if getattr(args, "candidates", None):
        config = override(config, candidates_n=args.candidates)
    if getattr(args, "mode", None) in ("db", "zero_shot"):
        config = override(config, mode=args.mode)
    return config


def _read_article(path: str) -> Article:
    p = Path(path)
    text = p.read_text("utf-8")
    if p.suffix == ".json":
        data = json.loads(text)
        return Article(
            id=str(data.get("id") or p.stem),
            title=str(data.get("title") or p.stem),
            body=str(data.get("body") or data.get("content") or ""),
            author=data.get("author"),
            date=data.get("date"),
            publication=data.get("publication"),
            topic=data.get("topic"),
        )
    return Article(id=p.stem, title=p.stem, body=text)


def _open_store(config: PipelineConfig, provider, create: bool = False) -> ProfileStore:
    if not config.store_path:
        raise ValueError("this command needs --store PATH")
    return ProfileStore(config.store_path, provider, alpha=config.alpha, create=create)


def _emit(args, payload: dict, table: str) -> None:
    if args.output == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(table)


def cmd_features(args, config: PipelineConfig) -> int:
    provider = make_provider(config.provider)
    text = Path(args.input).read_text("utf-8")
    profile = compute_features(text, config.semantic_source, provider=provider)
    payload = profile_to_dict(profile)
    width = max(len(label) for label in FEATURE_LABELS.values())
    lines = [
        f"{FEATURE_LABELS[name].ljust(width)}  {format_value(name, payload[name])}"
        for name in AGGREGATED_FEATURES
    ]
    lines.append(f"{FEATURE_LABELS['style_summary'].ljust(width)}  {profile.style_summary}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_ingest(args, config: PipelineConfig) -> int:
    provider = make_provider(config.provider)
    store = _open_store(config, provider, create=True)
    result = load_dataset(args.dataset, args.format)
    exclude = tuple(name.strip() for name in args.exclude_authors.split(",") if name.strip())
    summary = store.warm_up(result.articles, exclude_authors=exclude)
    payload = {
        "authors_added": summary.authors_added,
        "articles_added": summary.articles_added,
        "skipped": summary.skipped + result.skipped,
        "skip_reasons": dict(summary.skip_reasons),
        "malformed_rows": result.skipped,
    }
    table = "\n".join(f"{k}: {v}" for k, v in payload.items())
    _emit(args, payload, table)
    return 0


def cmd_assess(args, config: PipelineConfig) -> int:
    provider = make_provider(config.provider)
    store = None
    if config.mode == "db":
        store = _open_store(config, provider, create=False)
    article = _read_article(args.article)
    report = assess(article, config, provider=provider, store=store)
    payload = report.to_dict()
    lines = [
        f"article: {report.article_id}  mode: {report.mode}  strategy: {report.strategy}",
        f"comparisons: {report.counters.get('comparisons')}",
        "rank  author                      likelihood  verdict",
    ]
    for i, match in enumerate(report.ranked_matches[:10], start=1):
        lines.append(
            f"{str(i).ljust(4)}  {match.author_name.ljust(26)}  "
            f"{match.likelihood:.4f}      {match.verdict}"
        )
    if report.reflection:
        top = report.reflection.identifying_features[0]
        lines.append(f"most identifying: {FEATURE_LABELS[top.feature_name]} (z={top.z_score:.4f})")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_defend(args, config: PipelineConfig) -> int:
    provider = make_provider(config.provider)
    store = None
    if config.mode == "db":
        store = _open_store(config, provider, create=False)
    article = _read_article(args.article)
    report = assess(article, config, provider=provider, store=store)
    plan = build_suggestions(report.reflection, args.top_features, config.utility_floor)
    outcome = apply_defense(
        article.body,
        plan,
        report.ranked_matches[0].reference,
        provider,
        mode=args.mode,
        strategy=config.strategy,
        threshold=config.decision_threshold,
        semantic_source=config.semantic_source,
        prompt_style="paraphrase" if args.baseline else "guided",
    )
    payload = outcome.to_dict()
    table = "\n".join(
        [
            f"matched author: {report.reflection.matched_author}",
            f"pre-likelihood:  {outcome.pre_likelihood:.4f}",
            f"post-likelihood: {outcome.post_likelihood:.4f}",
            f"utility score:   {outcome.utility_score:.4f}",
            "suggestions:",
            *[f"  {i + 1}. {s}" for i, s in enumerate(outcome.suggestions_used)],
            "rewritten text:",
            outcome.rewritten_text,
        ]
    )
    _emit(args, payload, table)
    return 0


def _load_scenario_corpus(spec: dict, seed: int):
    from .synthetic import make_disjoint_corpus, make_separable_corpus

    kind = spec.get("kind", "file")
    if kind == "synthetic-separable":
        return make_separable_corpus(
            n_authors=spec.get("authors", 20),
            samples_per_author=spec.get("samples", 20),
            held_out=spec.get("held_out", 2),
            seed=spec.get("seed", seed),
        )
    if kind == "synthetic-disjoint":
        return make_disjoint_corpus(
            n_authors=spec.get("authors", 50),
            samples_per_author=spec.get("samples", 5),
            held_out=spec.get("held_out", 5),
            seed=spec.get("seed", seed),
        )
    if kind == "file":
        result = load_dataset(spec["path"], spec.get("format"))
        held_per_author = spec.get("held_out_per_author", 1)
        by_author: dict[str, list[Article]] = {}
        for article in result.articles:
            if article.author:
                by_author.setdefault(article.author, []).append(article)
        train, heldout = [], []
        for author in sorted(by_author):
            articles = by_author[author]
            cut = max(len(articles) - held_per_author, 1)
            train.extend(articles[:cut])
            heldout.extend(articles[cut:])
        return train, heldout
    raise ValueError(f"unknown corpus kind: {kind!r}")


def cmd_eval(args, config: PipelineConfig) -> int:
    provider = make_provider(config.provider)
    spec = json.loads(Path(args.scenario).read_text("utf-8"))
    strategy = args.strategy or spec.get("strategy", config.strategy)
    seed = config.seed
    train, heldout = _load_scenario_corpus(spec.get("corpus", {}), seed)

    if config.store_path:
        store = ProfileStore(config.store_path, provider, alpha=config.alpha, create=True)
    else:
        store = ProfileStore(
            tempfile.mkdtemp(prefix="stylorisk-eval-"), provider, alpha=config.alpha
        )
    if store.stats().article_count == 0:
        store.warm_up(train)

    kind = spec.get("kind", "open_world")
    if kind == "targeted":
        scenario = build_targeted_scenario(
            targets=spec["targets"],
            pool=heldout,
            size=spec.get("test_size", len(heldout)),
            seed=seed,
            samples_per_candidate=spec.get("samples_per_candidate", config.samples_per_candidate),
        )
        runner = lambda: run_targeted(scenario, strategy, store, provider, config)
    elif kind == "open_world":
        scenario = OpenWorldScenario(
            test_set=tuple(heldout),
            candidates_n=spec.get("candidates_n", config.candidates_n),
            k_values=tuple(spec.get("k_values", (1, 3))),
        )
        runner = lambda: run_open_world(scenario, strategy, store, provider, config)
    elif kind == "sweep_candidates":
        rows = open_world_topk_vs_candidates(
            heldout, strategy, store, provider, config,
            candidate_counts=spec.get("candidate_counts", (5, 10, 20)),
            k=spec.get("k", 3),
        )
        out = args.out or "sweep_candidates.csv"
        write_plot_csv(rows, out, ("candidates_n", f"top{spec.get('k', 3)}_full"))
        print(f"wrote {out}")
        return 0
    else:
        raise ValueError(f"unknown scenario kind: {kind!r}")

    defense_spec = spec.get("defense")
    if defense_spec:
        defense = DefenseEvalConfig(
            mode=defense_spec.get("mode", "rule_based"),
            top_k_features=defense_spec.get("top_k_features", 3),
            utility_floor=defense_spec.get("utility_floor", config.utility_floor),
            prompt_style=defense_spec.get("prompt_style", "guided"),
        )
        result = run_defense_eval(scenario, strategy, store, provider, config, defense)
        payload = result.to_dict()
        table = "\n".join(
            [
                "== pre-defense ==",
                result.pre.to_table(),
                "== post-defense ==",
                result.post.to_table(),
                f"mean utility: {result.mean_utility:.4f}  rejected: {result.rejected}",
            ]
        )
    else:
        report = runner()
        payload = report.to_dict()
        table = report.to_table()

    if args.out:
        Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2), "utf-8")
    _emit(args, payload, table)
    return 0


def cmd_db_stats(args, config: PipelineConfig) -> int:
    provider = make_provider(config.provider)
    store = _open_store(config, provider, create=False)
    stats = store.stats()
    payload = {
        "version": stats.version,
        "embedding_dim": stats.embedding_dim,
        "author_count": stats.author_count,
        "article_count": stats.article_count,
        "created_at": stats.created_at,
        "updated_at": stats.updated_at,
    }
    table = "\n".join(f"{k}: {v}" for k, v in payload.items())
    _emit(args, payload, table)
    return 0


_COMMANDS = {
    "features": cmd_features,
    "ingest": cmd_ingest,
    "assess": cmd_assess,
    "defend": cmd_defend,
    "eval": cmd_eval,
    "db-stats": cmd_db_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        return _COMMANDS[args.command](args, config)
    except StyloError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
