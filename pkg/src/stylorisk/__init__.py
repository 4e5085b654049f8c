"""stylorisk: authorship deanonymization risk assessment and mitigation.

Public surface re-exported here; see README for the CLI and the module
layout.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .config import PipelineConfig, ProviderConfig, load_config
from .defense import (
    DefenseOutcome,
    ReflectionReport,
    RewritePlan,
    apply_defense,
    build_recompose_prompt,
    build_suggestions,
    rule_based_rewrite,
)
from .evaluation import (
    EvalReport,
    OpenWorldScenario,
    TargetedScenario,
    build_targeted_scenario,
    f1,
    load_dataset,
    run_defense_eval,
    run_open_world,
    run_targeted,
    top_k_rate,
)
from .matching import MatchResult, match_es, match_lda, match_sala
from .pipeline import ArticleMetadata, RiskReport, assess, extract_metadata
from .provider import Embedding, HttpProvider, StubProvider, cosine, make_provider
from .store import Article, AuthorRecord, ProfileStore, StoreManifest
from .stylometry import (
    AggregatedProfile,
    StylometricProfile,
    aggregate,
    compute_features,
    describe_features,
    feature_distance,
)
from .textcore import (
    SegmentedText,
    Token,
    TokenKind,
    count_syllables,
    is_stopword,
    split_sentences,
    tag_pos,
    tokenize,
)

__version__ = "0.1.0"
