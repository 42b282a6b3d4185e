"""Joint unigram/bigram/trigram document embeddings and semantic similarity.

Documents are embedded as the average of their n-gram vectors. Training
predicts each held-out token from the rest of its document (all other
in-vocabulary unigrams plus every bigram/trigram not covering the target
position) with negative sampling, the same shape of objective as CBOW
over a whole-sentence window. Bigrams and trigrams share a fixed bucket
table addressed by a stable 64-bit FNV-1a hash, so training is
reproducible across processes.

Semantic similarity between two corpora is the exact mean pairwise
cosine, computed in O(n + m) via the identity

    mean_ij cos(a_i, b_j) = dot(mean_i a_i/|a_i|, mean_j b_j/|b_j|).
"""

from __future__ import annotations

import logging
import struct
import threading
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .tokens import normalize_plaintext

logger = logging.getLogger(__name__)

_MAGIC = b"LSEM"
_FORMAT_VERSION = 1

# Linear learning-rate decay never goes below this fraction of the start rate.
_MIN_ALPHA_FRACTION = 1e-4


class EmbeddingError(Exception):
    """Empty corpus, empty vocabulary, zero-norm cosine operand, ..."""


@dataclass(frozen=True)
class EmbeddingConfig:
    """Training hyperparameters. Defaults suit full-size corpora; tests
    shrink dim/epochs/buckets and min_count."""

    dim: int = 100
    epochs: int = 5
    negative: int = 5
    learning_rate: float = 0.05
    min_count: int = 5
    buckets: int = 2**20  # 0 disables bigram/trigram features
    max_tokens: int = 1024  # longer documents are truncated (and logged)
    include_docstrings: bool = False
    workers: int = 1  # >1 trades determinism for speed

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise EmbeddingError("dim must be >= 2")
        if self.epochs < 1 or self.negative < 1 or self.min_count < 1:
            raise EmbeddingError("epochs, negative, min_count must be >= 1")
        if self.buckets < 0 or self.workers < 1:
            raise EmbeddingError("buckets must be >= 0 and workers >= 1")


def _fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _ngram_bucket(token_ids: tuple[int, ...], buckets: int) -> int:
    key = b"\x00".join(str(i).encode() for i in token_ids)
    return _fnv1a_64(key) % buckets


@dataclass
class EmbeddingModel:
    """Trained vector table: unigram rows first, then hashed n-gram buckets."""

    dim: int
    vocab: dict[str, int]
    vectors: np.ndarray  # float32, shape (len(vocab) + buckets, dim)
    config: EmbeddingConfig
    seed: int

    @property
    def buckets(self) -> int:
        return self.vectors.shape[0] - len(self.vocab)

    def ngram_index(self, key: tuple[str, ...]) -> int | None:
        """Row index of a unigram/bigram/trigram, or None if out of vocab."""
        if len(key) == 1:
            return self.vocab.get(key[0])
        if self.buckets == 0:
            return None
        ids = tuple(self.vocab.get(tok, -1) for tok in key)
        if any(i < 0 for i in ids):
            return None
        return len(self.vocab) + _ngram_bucket(ids, self.buckets)

    def feature_rows(self, tokens: Sequence[str]) -> list[int]:
        """Vector rows of every in-vocabulary n-gram of a token sequence.

        An n-gram counts as in-vocabulary only when all its constituent
        unigrams survived the min-count cut.
        """
        tokens = tokens[: self.config.max_tokens]
        ids = [self.vocab.get(tok, -1) for tok in tokens]
        rows = [i for i in ids if i >= 0]
        if self.buckets > 0:
            base = len(self.vocab)
            for n in (2, 3):
                for start in range(len(ids) - n + 1):
                    window = tuple(ids[start : start + n])
                    if all(i >= 0 for i in window):
                        rows.append(base + _ngram_bucket(window, self.buckets))
        return rows


def _training_streams(corpus: Corpus, config: EmbeddingConfig) -> list[list[str]]:
    streams = []
    truncated = 0
    for doc in corpus.documents:
        tokens = normalize_plaintext(doc.code)
        if len(tokens) > config.max_tokens:
            truncated += 1
            logger.debug("truncating %s: %d tokens", doc.id, len(tokens))
            tokens = tokens[: config.max_tokens]
        streams.append(tokens)
        if config.include_docstrings and doc.docstring:
            streams.append(normalize_plaintext(doc.docstring)[: config.max_tokens])
    if truncated:
        logger.info("truncated %d document(s) to %d tokens", truncated, config.max_tokens)
    return streams


def _build_vocab(
    streams: Sequence[Sequence[str]], min_count: int
) -> tuple[dict[str, int], np.ndarray]:
    counts = Counter(tok for stream in streams for tok in stream)
    # Most frequent first, ties alphabetical, so ids are reproducible.
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    if not kept:
        raise EmbeddingError(
            f"empty vocabulary: no token reaches min_count={min_count}"
        )
    vocab = {tok: i for i, tok in enumerate(kept)}
    freqs = np.array([counts[tok] for tok in kept], dtype=np.float64)
    return vocab, freqs


class _NoiseTable:
    """Unigram noise distribution (counts^0.75) sampled via searchsorted."""

    def __init__(self, freqs: np.ndarray):
        weights = freqs**0.75
        self.cum = np.cumsum(weights)
        self.total = float(self.cum[-1])

    def draw(self, rng: np.random.Generator, exclude: int, k: int) -> list[int]:
        if len(self.cum) == 1:
            # Degenerate single-token vocabulary: nothing else to sample.
            return [0] * k
        out: list[int] = []
        while len(out) < k:
            idx = int(np.searchsorted(self.cum, rng.random() * self.total, side="right"))
            if idx != exclude:
                out.append(min(idx, len(self.cum) - 1))
        return out


def _doc_features(
    tokens: Sequence[str], vocab: dict[str, int], buckets: int, base: int
) -> tuple[list[tuple[int, int]], list[tuple[int, int, int]]]:
    """In-vocab unigrams as (position, row) and n-grams as (start, end, row)."""
    ids = [vocab.get(tok, -1) for tok in tokens]
    unigrams = [(pos, i) for pos, i in enumerate(ids) if i >= 0]
    ngrams: list[tuple[int, int, int]] = []
    if buckets > 0:
        for n in (2, 3):
            for start in range(len(ids) - n + 1):
                window = tuple(ids[start : start + n])
                if all(i >= 0 for i in window):
                    row = base + _ngram_bucket(window, buckets)
                    ngrams.append((start, start + n - 1, row))
    return unigrams, ngrams


def _train_stream(
    tokens: Sequence[str],
    vocab: dict[str, int],
    w_in: np.ndarray,
    w_out: np.ndarray,
    noise: _NoiseTable,
    rng: np.random.Generator,
    config: EmbeddingConfig,
    alpha_for: Callable[[], float],
) -> int:
    unigrams, ngrams = _doc_features(tokens, vocab, config.buckets, len(vocab))
    labels = np.zeros(1 + config.negative, dtype=np.float32)
    labels[0] = 1.0
    updates = 0
    for t, target in unigrams:
        context = [row for pos, row in unigrams if pos != t]
        context.extend(row for start, end, row in ngrams if not start <= t <= end)
        if not context:
            continue
        alpha = alpha_for()
        ctx = np.asarray(context, dtype=np.int64)
        hidden = w_in[ctx].mean(axis=0)
        rows = np.asarray([target] + noise.draw(rng, target, config.negative))
        outputs = w_out[rows]
        scores = outputs @ hidden
        gradients = (labels - _sigmoid(scores)) * alpha
        np.add.at(w_out, rows, np.outer(gradients, hidden))
        np.add.at(w_in, ctx, (gradients @ outputs) / len(ctx))
        updates += 1
    return updates


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


def train(corpus: Corpus, config: EmbeddingConfig | None = None, seed: int = 1) -> EmbeddingModel:
    """Train an embedding model on a corpus (normally the combined one).

    Single-threaded training is bit-reproducible for a fixed seed. With
    ``workers > 1`` shards update the shared tables without locks, which
    is faster but gives up determinism.
    """
    config = config or EmbeddingConfig()
    if not corpus.documents:
        raise EmbeddingError("cannot train on an empty corpus")
    streams = _training_streams(corpus, config)
    vocab, freqs = _build_vocab(streams, config.min_count)
    noise = _NoiseTable(freqs)

    rows = len(vocab) + config.buckets
    rng = np.random.Generator(np.random.PCG64(seed))
    w_in = ((rng.random((rows, config.dim)) - 0.5) / config.dim).astype(np.float32)
    w_out = np.zeros((len(vocab), config.dim), dtype=np.float32)

    total_targets = sum(
        sum(1 for tok in stream if tok in vocab) for stream in streams
    )
    total_updates = max(total_targets * config.epochs, 1)
    progress = [0]

    def alpha_for() -> float:
        alpha = config.learning_rate * (1.0 - progress[0] / total_updates)
        progress[0] += 1
        return max(alpha, config.learning_rate * _MIN_ALPHA_FRACTION)

    if config.workers == 1:
        for _epoch in range(config.epochs):
            for stream in streams:
                _train_stream(stream, vocab, w_in, w_out, noise, rng, config, alpha_for)
    else:
        for epoch in range(config.epochs):
            threads = []
            for w in range(config.workers):
                shard = streams[w :: config.workers]
                shard_rng = np.random.Generator(
                    np.random.PCG64((seed, epoch, w))
                )
                threads.append(
                    threading.Thread(
                        target=lambda s=shard, r=shard_rng: [
                            _train_stream(st, vocab, w_in, w_out, noise, r, config, alpha_for)
                            for st in s
                        ]
                    )
                )
            for t in threads:
                t.start()
            for t in threads:
                t.join()

    return EmbeddingModel(dim=config.dim, vocab=vocab, vectors=w_in, config=config, seed=seed)


# ---------------------------------------------------------------------------
# Document embedding and similarity
# ---------------------------------------------------------------------------


def embed_document(model: EmbeddingModel, tokens: Sequence[str]) -> tuple[np.ndarray, int]:
    """Average of the document's in-vocabulary n-gram vectors.

    Returns (vector, feature_count); a zero feature count marks the
    document unembeddable and the vector is all zeros.
    """
    rows = model.feature_rows(tokens)
    if not rows:
        return np.zeros(model.dim, dtype=np.float32), 0
    return model.vectors[np.asarray(rows)].mean(axis=0), len(rows)


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity; raises on zero-norm operands."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise EmbeddingError("cosine of a zero-norm vector is undefined")
    return float(np.dot(a, b) / (norm_a * norm_b))


def _mean_unit_vector(model: EmbeddingModel, corpus: Corpus) -> tuple[np.ndarray, int]:
    total = np.zeros(model.dim, dtype=np.float64)
    embeddable = 0
    for doc in corpus.documents:
        vector, count = embed_document(model, normalize_plaintext(doc.code))
        if count == 0:
            continue
        as64 = vector.astype(np.float64)
        norm = float(np.linalg.norm(as64))
        if norm == 0.0:
            continue
        total += as64 / norm
        embeddable += 1
    if embeddable == 0:
        return total, 0
    return total / embeddable, embeddable


def semantic_similarity(model: EmbeddingModel, candidate: Corpus, target: Corpus) -> float:
    """Exact mean cosine over all cross pairs of embeddable documents."""
    mean_a, count_a = _mean_unit_vector(model, candidate)
    mean_b, count_b = _mean_unit_vector(model, target)
    if count_a == 0 or count_b == 0:
        raise EmbeddingError(
            "no embeddable documents on one side "
            f"({candidate.language}: {count_a}, {target.language}: {count_b})"
        )
    return float(np.dot(mean_a, mean_b))


@dataclass(frozen=True)
class SimilarityScoreMap:
    """Raw per-language scores and the same scores scaled so max == 1."""

    raw: dict[str, float]
    normalized: dict[str, float]


def normalize_scores(raw: Mapping[str, float]) -> SimilarityScoreMap:
    """Divide every score by the largest one.

    Negative raw scores (possible for mean cosines) are clamped to zero
    before scaling so normalized values stay in [0, 1].
    """
    if not raw:
        raise EmbeddingError("cannot normalize an empty score map")
    top = max(raw.values())
    if top <= 0:
        raise EmbeddingError("no positive score to normalize against")
    clamped = {}
    for language, value in raw.items():
        if value < 0:
            logger.warning("clamping negative score %s=%g to 0", language, value)
            value = 0.0
        clamped[language] = value
    return SimilarityScoreMap(
        raw=dict(raw),
        normalized={language: value / top for language, value in clamped.items()},
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    """Binary model file: header, vocab table, float32 LE vectors."""
    config = model.config
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(
            struct.pack(
                "<IIIIIIIIdq",
                _FORMAT_VERSION,
                model.dim,
                len(model.vocab),
                model.buckets,
                config.epochs,
                config.negative,
                config.min_count,
                config.max_tokens,
                config.learning_rate,
                model.seed,
            )
        )
        for token, _index in sorted(model.vocab.items(), key=lambda kv: kv[1]):
            raw = token.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(model.vectors, dtype="<f4").tobytes())


def load_model(path: str | Path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise EmbeddingError(f"{path}: not a model file (bad magic {magic!r})")
        header = struct.unpack("<IIIIIIIIdq", fh.read(struct.calcsize("<IIIIIIIIdq")))
        version, dim, vocab_size, buckets = header[:4]
        epochs, negative, min_count, max_tokens, learning_rate, seed = header[4:]
        if version != _FORMAT_VERSION:
            raise EmbeddingError(f"{path}: unsupported format version {version}")
        vocab: dict[str, int] = {}
        for index in range(vocab_size):
            (length,) = struct.unpack("<I", fh.read(4))
            vocab[fh.read(length).decode("utf-8")] = index
        rows = vocab_size + buckets
        data = fh.read(rows * dim * 4)
        vectors = np.frombuffer(data, dtype="<f4").reshape(rows, dim).copy()
    config = EmbeddingConfig(
        dim=dim,
        epochs=epochs,
        negative=negative,
        learning_rate=learning_rate,
        min_count=min_count,
        buckets=buckets,
        max_tokens=max_tokens,
    )
    return EmbeddingModel(dim=dim, vocab=vocab, vectors=vectors, config=config, seed=seed)


def export_text(model: EmbeddingModel, path: str | Path) -> None:
    """Inspection dump: one "token v1 ... v_dim" line per vocab entry."""
    with open(path, "w", encoding="utf-8") as fh:
        for token, index in sorted(model.vocab.items(), key=lambda kv: kv[1]):
            values = " ".join(f"{v:.6f}" for v in model.vectors[index])
            fh.write(f"{token} {values}\n")
