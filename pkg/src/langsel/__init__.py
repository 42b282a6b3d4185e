"""langsel: pick fine-tuning language corpora for a low-resource target.

The toolkit scores every candidate high-resource corpus against the
target by combining two normalized signals, a semantic one (mean cosine
between n-gram document embeddings trained on the combined multilingual
corpus) and a textual one (count of cross-corpus token-level clones),
and selects the languages whose average reaches the threshold. It also
ships the surrounding evaluation apparatus: smoothed BLEU, METEOR, MRR,
Mann-Whitney U, performance-to-time ratios, and quartile length binning.
"""

from .analysis import LengthBins, bin_lengths, emit_report, percentile, quartile_bins
from .clones import (
    CloneFragment,
    ClonePair,
    CloneParams,
    CloneSet,
    detect_cross_clones,
    normalize_clone_counts,
    textual_similarity,
)
from .corpus import (
    Corpus,
    CorpusDocument,
    CorpusError,
    combine,
    load_jsonl,
    stats,
    write_jsonl,
)
from .embedding import (
    EmbeddingConfig,
    EmbeddingModel,
    SimilarityScoreMap,
    cosine,
    embed_document,
    load_model,
    normalize_scores,
    save_model,
    semantic_similarity,
    train,
)
from .metrics import (
    EvalPair,
    MeteorConfig,
    PerfTimeRecord,
    RankedQuery,
    UTestResult,
    bleu,
    mann_whitney_u,
    meteor,
    mrr,
    ptr,
    rank_from_scores,
    sentence_bleu,
)
from .pipeline import RunConfig, run_suitability
from .suitability import (
    SuitabilityReport,
    SuitabilityRow,
    build_finetune_set,
    recommend_for_task,
    suitability,
)
from .tokens import TokenStream, length_of, normalize_plaintext

__version__ = "0.1.0"

__all__ = [
    "LengthBins", "bin_lengths", "emit_report", "percentile", "quartile_bins",
    "CloneFragment", "ClonePair", "CloneParams", "CloneSet",
    "detect_cross_clones", "normalize_clone_counts", "textual_similarity",
    "Corpus", "CorpusDocument", "CorpusError", "combine", "load_jsonl",
    "stats", "write_jsonl",
    "EmbeddingConfig", "EmbeddingModel", "SimilarityScoreMap", "cosine",
    "embed_document", "load_model", "normalize_scores", "save_model",
    "semantic_similarity", "train",
    "EvalPair", "MeteorConfig", "PerfTimeRecord", "RankedQuery", "UTestResult",
    "bleu", "mann_whitney_u", "meteor", "mrr", "ptr", "rank_from_scores",
    "sentence_bleu",
    "RunConfig", "run_suitability",
    "SuitabilityReport", "SuitabilityRow", "build_finetune_set",
    "recommend_for_task", "suitability",
    "TokenStream", "length_of", "normalize_plaintext",
    "__version__",
]
