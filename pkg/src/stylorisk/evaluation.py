"""Evaluation harness: targeted attack (F1), open-world attack (top-k,
full and filtered), candidate coverage, and defense effectiveness.

Metrics are plain functions so they can be checked against brute-force
oracles; runners fan out per test article and fold results in a fixed
order, so reports are reproducible whenever the provider is.
"""

from __future__ import annotations

import csv
import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .config import PipelineConfig
from .defense import apply_defense, build_suggestions
from .errors import (
    EmptyTextError,
    HeaderMismatchError,
    NotFoundError,
    UnknownTargetError,
    UtilityBelowFloorError,
)
from .matching import MatchReference, RefSample, match_candidate
from .pipeline import assess, build_article_context, reflect_stage
from .store import Article
from .stylometry import compute_features


# -- metrics -------------------------------------------------------------


def f1(tp: int, fp: int, fn: int) -> float:
    """F1 with the usual degenerate-case conventions.

    All-zero counts score 1.0 (nothing to find, nothing found wrong);
    zero true positives with any error scores 0.0.
    """
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be non-negative")
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def top_k_rate(ranks, k: int) -> float:
    """Fraction of rank values (1-based, None = absent) at or under k."""
    ranks = list(ranks)
    if not ranks:
        return 0.0
    return sum(1 for r in ranks if r is not None and r <= k) / len(ranks)


# -- scenarios -----------------------------------------------------------


@dataclass(frozen=True)
class TestItem:
    __test__ = False  # not a pytest class despite the name

    article: Article
    is_target: bool
    true_author: str


@dataclass(frozen=True)
class TargetedScenario:
    targets: tuple[str, ...]
    test_set: tuple[TestItem, ...]
    samples_per_candidate: int = 5


@dataclass(frozen=True)
class OpenWorldScenario:
    test_set: tuple[Article, ...]
    candidates_n: int = 20
    k_values: tuple[int, ...] = (1, 3)

    def __post_init__(self):
        for article in self.test_set:
            if not article.author:
                raise ValueError(f"article {article.id} lacks ground-truth author")
        if self.candidates_n < max(self.k_values):
            raise ValueError("candidates_n must cover the largest k")


def build_targeted_scenario(
    targets,
    pool,
    size: int,
    seed: int = 42,
    samples_per_candidate: int = 5,
) -> TargetedScenario:
    """Balanced test set: half target articles, half non-target.

    Odd sizes round the extra slot to non-target (conservative for the
    attacker).  Sampling is seeded and deterministic.
    """
    targets = tuple(targets)
    target_set = set(targets)
    target_pool = [a for a in pool if a.author in target_set]
    non_pool = [a for a in pool if a.author not in target_set]
    n_target = size // 2
    n_non = size - n_target
    if len(target_pool) < n_target:
        raise ValueError(f"need {n_target} target articles, have {len(target_pool)}")
    if len(non_pool) < n_non:
        raise ValueError(f"need {n_non} non-target articles, have {len(non_pool)}")
    rng = random.Random(seed)
    chosen = [
        TestItem(a, True, a.author) for a in rng.sample(target_pool, n_target)
    ] + [TestItem(a, False, a.author) for a in rng.sample(non_pool, n_non)]
    rng.shuffle(chosen)
    return TargetedScenario(
        targets=targets, test_set=tuple(chosen), samples_per_candidate=samples_per_candidate
    )


# -- reports -------------------------------------------------------------


@dataclass
class EvalReport:
    kind: str
    strategy: str
    metrics: dict
    coverage_rate: float | None = None
    denominators: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    config_snapshot: dict = field(default_factory=dict)
    repetitions: int = 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "strategy": self.strategy,
            "metrics": self.metrics,
            "coverage_rate": self.coverage_rate,
            "denominators": self.denominators,
            "counters": self.counters,
            "config_snapshot": self.config_snapshot,
            "repetitions": self.repetitions,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_table(self) -> str:
        rows = [("kind", self.kind), ("strategy", self.strategy)]
        for key in sorted(self.metrics):
            value = self.metrics[key]
            rows.append((key, "n/a" if value is None else f"{value:.4f}"))
        if self.coverage_rate is not None:
            rows.append(("coverage_rate", f"{self.coverage_rate:.4f}"))
        width = max(len(k) for k, _ in rows)
        lines = [f"{k.ljust(width)}  {v}" for k, v in rows]
        bar = "-" * max(len(line) for line in lines)
        return "\n".join([bar] + lines + [bar])


def _config_snapshot(config: PipelineConfig) -> dict:
    return {
        "mode": config.mode,
        "strategy": config.strategy,
        "candidates_n": config.candidates_n,
        "samples_per_candidate": config.samples_per_candidate,
        "alpha": config.alpha,
        "fallback_cutoff": config.fallback_cutoff,
        "decision_threshold": config.decision_threshold,
        "seed": config.seed,
        "provider_kind": config.provider.kind,
    }


# -- targeted attack -----------------------------------------------------


def _target_references(scenario, store, provider, config) -> dict[str, MatchReference]:
    references = {}
    for target in scenario.targets:
        if store is not None:
            try:
                record = store.get_author(target)
            except NotFoundError as exc:
                raise UnknownTargetError(str(exc)) from exc
            references[target] = MatchReference(
                name=target, aggregated=record.profile, centroid=record.centroid,
                samples=_store_samples(store, record, scenario.samples_per_candidate),
            )
        else:
            hits = provider.web_search(f'articles by "{target}"', limit=scenario.samples_per_candidate)
            samples = []
            for h in hits.hits:
                if not h.snippet:
                    continue
                try:
                    profile = compute_features(h.snippet, config.semantic_source, provider=provider)
                except EmptyTextError:
                    continue
                samples.append(
                    RefSample(text=h.snippet, profile=profile, embedding=provider.embed(h.snippet))
                )
            if not samples:
                raise UnknownTargetError(f"no samples found for target {target!r}")
            references[target] = MatchReference(name=target, samples=tuple(samples))
    return references


def _store_samples(store, record, limit):
    samples = []
    for article_id in record.sample_ids[:limit]:
        samples.append(
            RefSample(
                text=store.get_article(article_id).body,
                profile=store.article_profile(article_id),
                embedding=store.article_embedding(article_id),
            )
        )
    return tuple(samples)


def run_targeted(
    scenario: TargetedScenario,
    strategy: str,
    store,
    provider,
    config: PipelineConfig | None = None,
) -> EvalReport:
    """Per-target F1, macro-averaged.

    An article is credited to a target only when that target is both the
    likelihood argmax and judged 'same'; a hit on the wrong target counts
    as a false positive there and a false negative for the true target.
    """
    config = config or PipelineConfig(strategy=strategy)
    references = _target_references(scenario, store, provider, config)
    tp = {t: 0 for t in scenario.targets}
    fp = {t: 0 for t in scenario.targets}
    fn = {t: 0 for t in scenario.targets}
    comparisons = 0

    def evaluate(item: TestItem):
        ctx = build_article_context(item.article, provider, config.semantic_source)
        return {
            t: match_candidate(ctx, references[t], strategy, provider, config.decision_threshold)
            for t in scenario.targets
        }

    all_results = _map_ordered(evaluate, scenario.test_set, config.jobs)
    for item, results in zip(scenario.test_set, all_results):
        comparisons += sum(r.comparisons_made for r in results.values())
        best = min(results, key=lambda t: (-results[t].likelihood, t))
        predicted = best if results[best].verdict == "same" else None
        for t in scenario.targets:
            if predicted == t:
                if item.true_author == t:
                    tp[t] += 1
                else:
                    fp[t] += 1
            elif item.true_author == t:
                fn[t] += 1

    per_target = {t: f1(tp[t], fp[t], fn[t]) for t in scenario.targets}
    macro = sum(per_target.values()) / len(per_target)
    return EvalReport(
        kind="targeted",
        strategy=strategy,
        metrics={"f1": macro, **{f"f1[{t}]": v for t, v in per_target.items()}},
        denominators={"test_articles": len(scenario.test_set), "targets": len(scenario.targets)},
        counters={"comparisons": comparisons},
        config_snapshot=_config_snapshot(config),
    )


# -- open-world attack ---------------------------------------------------


def run_open_world(
    scenario: OpenWorldScenario,
    strategy: str,
    store,
    provider,
    config: PipelineConfig | None = None,
) -> EvalReport:
    """Top-k rates over all articles (full) and over the articles whose
    true author made the candidate list (filtered), plus coverage."""
    config = config or PipelineConfig()
    config = replace(config, strategy=strategy, candidates_n=scenario.candidates_n)

    def evaluate(article: Article):
        report = assess(article, config, provider=provider, store=store)
        names = [c.author_name for c in report.candidates.candidates]
        covered = article.author in names
        rank = None
        for i, match in enumerate(report.ranked_matches):
            if match.author_name == article.author:
                rank = i + 1
                break
        return covered, rank, report.counters.get("comparisons", 0)

    rows = _map_ordered(evaluate, scenario.test_set, config.jobs)
    covered_flags = [r[0] for r in rows]
    ranks = [r[1] for r in rows]
    comparisons = sum(r[2] for r in rows)
    covered_ranks = [rank for covered, rank, _ in rows if covered]

    metrics = {}
    for k in scenario.k_values:
        metrics[f"top{k}_full"] = top_k_rate(ranks, k)
        metrics[f"top{k}_filtered"] = top_k_rate(covered_ranks, k) if covered_ranks else None
    coverage = sum(covered_flags) / len(covered_flags) if covered_flags else 0.0
    return EvalReport(
        kind="open_world",
        strategy=strategy,
        metrics=metrics,
        coverage_rate=coverage,
        denominators={
            "test_articles": len(scenario.test_set),
            "filtered_articles": len(covered_ranks),
        },
        counters={"comparisons": comparisons},
        config_snapshot=_config_snapshot(config),
    )


# -- defense evaluation --------------------------------------------------


@dataclass(frozen=True)
class DefenseEvalConfig:
    mode: str = "rule_based"        # "rule_based", "provider" or "noop"
    top_k_features: int = 3
    utility_floor: float = 0.85
    prompt_style: str = "guided"


@dataclass
class DefenseEvalResult:
    pre: EvalReport
    post: EvalReport
    mean_utility: float
    rejected: int = 0

    def to_dict(self) -> dict:
        return {
            "pre": self.pre.to_dict(),
            "post": self.post.to_dict(),
            "mean_utility": self.mean_utility,
            "rejected": self.rejected,
        }


def _defend_article(article, strategy, store, provider, config, defense, targets=None):
    """Attack the article, reflect, and rewrite per the reflection."""
    if defense.mode == "noop":
        return article, 1.0, False
    ctx = build_article_context(article, provider, config.semantic_source)
    if targets is not None:
        references = targets
        results = {
            t: match_candidate(ctx, references[t], strategy, provider, config.decision_threshold)
            for t in references
        }
        best_name = min(results, key=lambda t: (-results[t].likelihood, t))
        best = results[best_name]
        reflection = reflect_stage(ctx.profile, best, provider)
        reference = best.reference
    else:
        report = assess(article, config, provider=provider, store=store)
        best = report.ranked_matches[0]
        reflection = report.reflection
        reference = best.reference
    plan = build_suggestions(reflection, defense.top_k_features, defense.utility_floor)
    try:
        outcome = apply_defense(
            article.body,
            plan,
            reference,
            provider,
            mode=defense.mode,
            strategy=strategy,
            threshold=config.decision_threshold,
            semantic_source=config.semantic_source,
            prompt_style=defense.prompt_style,
        )
    except UtilityBelowFloorError as exc:
        return article, exc.utility_score, True
    rewritten = Article(
        id=article.id,
        title=article.title,
        body=outcome.rewritten_text,
        author=article.author,
        date=article.date,
        publication=article.publication,
        topic=article.topic,
    )
    return rewritten, outcome.utility_score, False


def run_defense_eval(
    scenario,
    strategy: str,
    store,
    provider,
    config: PipelineConfig | None = None,
    defense: DefenseEvalConfig | None = None,
) -> DefenseEvalResult:
    """Baseline eval, defense on every test article, identical re-eval."""
    config = config or PipelineConfig(strategy=strategy)
    defense = defense or DefenseEvalConfig()

    if isinstance(scenario, TargetedScenario):
        pre = run_targeted(scenario, strategy, store, provider, config)
        references = _target_references(scenario, store, provider, config)
        rewritten_items = []
        utilities = []
        rejected = 0
        for item in scenario.test_set:
            new_article, utility, was_rejected = _defend_article(
                item.article, strategy, store, provider, config, defense, targets=references
            )
            rewritten_items.append(TestItem(new_article, item.is_target, item.true_author))
            utilities.append(utility)
            rejected += int(was_rejected)
        post_scenario = TargetedScenario(
            targets=scenario.targets,
            test_set=tuple(rewritten_items),
            samples_per_candidate=scenario.samples_per_candidate,
        )
        post = run_targeted(post_scenario, strategy, store, provider, config)
    elif isinstance(scenario, OpenWorldScenario):
        pre = run_open_world(scenario, strategy, store, provider, config)
        run_config = replace(config, strategy=strategy, candidates_n=scenario.candidates_n)
        rewritten_articles = []
        utilities = []
        rejected = 0
        for article in scenario.test_set:
            new_article, utility, was_rejected = _defend_article(
                article, strategy, store, provider, run_config, defense
            )
            rewritten_articles.append(new_article)
            utilities.append(utility)
            rejected += int(was_rejected)
        post_scenario = OpenWorldScenario(
            test_set=tuple(rewritten_articles),
            candidates_n=scenario.candidates_n,
            k_values=scenario.k_values,
        )
        post = run_open_world(post_scenario, strategy, store, provider, config)
    else:
        raise TypeError(f"unsupported scenario type: {type(scenario).__name__}")

    mean_utility = sum(utilities) / len(utilities) if utilities else 1.0
    return DefenseEvalResult(pre=pre, post=post, mean_utility=mean_utility, rejected=rejected)


# -- dataset loading -----------------------------------------------------


@dataclass
class DatasetResult:
    articles: list[Article]
    skipped: int


_CSV_REQUIRED = ("id", "content")
_CSV_COLUMNS = ("id", "title", "author", "date", "publication", "topic", "content")


def load_dataset(path, fmt: str | None = None) -> DatasetResult:
    """Load articles from CSV (id,title,author,date,publication,topic,
    content) or JSONL (Article field names); malformed rows are skipped
    and counted."""
    path = str(path)
    if fmt is None:
        fmt = "jsonl" if path.endswith((".jsonl", ".ndjson")) else "csv"
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "jsonl":
        return _load_jsonl(path)
    raise ValueError(f"unknown dataset format: {fmt!r}")


def _load_csv(path: str) -> DatasetResult:
    articles = []
    skipped = 0
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _CSV_REQUIRED if c not in header]
        if missing:
            raise HeaderMismatchError(f"missing columns: {missing} (header: {header})")
        for row in reader:
            try:
                articles.append(
                    Article(
                        id=(row.get("id") or "").strip(),
                        title=(row.get("title") or "").strip(),
                        body=(row.get("content") or "").strip(),
                        author=(row.get("author") or "").strip() or None,
                        date=(row.get("date") or "").strip() or None,
                        publication=(row.get("publication") or "").strip() or None,
                        topic=(row.get("topic") or "").strip() or None,
                    )
                )
            except ValueError:
                skipped += 1
    return DatasetResult(articles=articles, skipped=skipped)


def _load_jsonl(path: str) -> DatasetResult:
    articles = []
    skipped = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                articles.append(
                    Article(
                        id=str(data.get("id") or ""),
                        title=str(data.get("title") or ""),
                        body=str(data.get("body") or ""),
                        author=data.get("author") or None,
                        date=data.get("date") or None,
                        publication=data.get("publication") or None,
                        topic=data.get("topic") or None,
                    )
                )
            except (json.JSONDecodeError, ValueError):
                skipped += 1
    return DatasetResult(articles=articles, skipped=skipped)


# -- plot data -----------------------------------------------------------


def targeted_f1_vs_samples(
    train_by_author: dict,
    scenario: TargetedScenario,
    strategy: str,
    provider,
    config: PipelineConfig,
    sample_counts,
    store_root,
) -> list[tuple[int, float]]:
    """F1 as a function of stored samples per author (figure-style sweep).

    Builds one throwaway store per sample count under store_root.
    """
    from .store import ProfileStore

    rows = []
    for count in sample_counts:
        store_path = f"{store_root}/sweep-samples-{count}"
        store = ProfileStore(store_path, provider, alpha=config.alpha)
        articles = [a for samples in train_by_author.values() for a in samples[:count]]
        store.warm_up(articles)
        report = run_targeted(scenario, strategy, store, provider, config)
        rows.append((count, report.metrics["f1"]))
    return rows


def open_world_topk_vs_candidates(
    scenario_set,
    strategy: str,
    store,
    provider,
    config: PipelineConfig,
    candidate_counts,
    k: int = 3,
) -> list[tuple[int, float]]:
    """Top-k rate as a function of candidate-list size."""
    rows = []
    for n in candidate_counts:
        scenario = OpenWorldScenario(
            test_set=tuple(scenario_set), candidates_n=n, k_values=(1, k)
        )
        report = run_open_world(scenario, strategy, store, provider, config)
        rows.append((n, report.metrics[f"top{k}_full"]))
    return rows


def write_plot_csv(rows, path, columns) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


# -- helpers -------------------------------------------------------------


def _map_ordered(func, items, jobs: int):
    """Apply func to items, preserving item order in the result list."""
    items = list(items)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]
