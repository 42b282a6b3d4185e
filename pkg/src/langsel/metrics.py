"""Evaluation measures for summary generation and retrieval experiments.

Implements smoothed sentence-level BLEU, METEOR with exact/stem/synonym
alignment stages, mean reciprocal rank, the Mann-Whitney U test (normal
approximation plus an exact permutation p for small samples), and the
performance-to-time ratio used to compare fine-tuning budgets.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

logger = logging.getLogger(__name__)

# Exact permutation p-values are enumerated only up to this combined size;
# C(12, 6) = 924 subsets keeps the cost negligible.
EXACT_PERMUTATION_LIMIT = 12


class MetricError(Exception):
    """Invalid metric input (empty sample, non-positive time, ...)."""


@dataclass(frozen=True)
class EvalPair:
    """One generated/reference sentence pair, both tokenized."""

    hypothesis: tuple[str, ...]
    reference: tuple[str, ...]

    def __post_init__(self) -> None:
        if not all(self.hypothesis) or not all(self.reference):
            raise MetricError("empty-string tokens are not allowed")


@dataclass(frozen=True)
class RankedQuery:
    """One retrieval query: rank of the correct answer, or None if absent."""

    query_id: str
    candidate_count: int = 1000
    rank: int | None = None

    def __post_init__(self) -> None:
        if self.rank is not None and not 1 <= self.rank <= self.candidate_count:
            raise MetricError(
                f"query {self.query_id!r}: rank {self.rank} outside "
                f"1..{self.candidate_count}"
            )


@dataclass(frozen=True)
class PerfTimeRecord:
    """Metric score and fine-tuning duration of one model."""

    model: str
    performance: float
    seconds: float

    def __post_init__(self) -> None:
        if self.performance < 0:
            raise MetricError(f"{self.model}: performance must be >= 0")
        if self.seconds <= 0:
            raise MetricError(f"{self.model}: time must be > 0")


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sentence_bleu(
    hypothesis: Sequence[str], reference: Sequence[str], max_n: int = 4
) -> float:
    """Sentence-level BLEU in [0, 1].

    Modified n-gram precisions with add-one smoothing for n >= 2 (exact
    precision for unigrams), uniform geometric mean, and brevity penalty
    exp(1 - r/c) when the hypothesis is shorter than the reference.
    """
    if max_n < 1:
        raise MetricError("max_n must be >= 1")
    c = len(hypothesis)
    r = len(reference)
    if c == 0:
        logger.warning("empty hypothesis scored as 0")
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        hyp_counts = _ngram_counts(hypothesis, n)
        ref_counts = _ngram_counts(reference, n)
        matched = sum(min(count, ref_counts[g]) for g, count in hyp_counts.items())
        total = max(c - n + 1, 0)
        if n == 1:
            precision = matched / total
        else:
            precision = (matched + 1) / (total + 1)
        if precision == 0.0:
            return 0.0
        log_sum += math.log(precision) / max_n
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_sum)


def bleu(pairs: Sequence[EvalPair], max_n: int = 4) -> float:
    """Corpus BLEU as a percentage: mean sentence BLEU over pairs, x100."""
    if not pairs:
        raise MetricError("bleu() needs at least one pair")
    total = sum(sentence_bleu(p.hypothesis, p.reference, max_n) for p in pairs)
    return 100.0 * total / len(pairs)


# ---------------------------------------------------------------------------
# Porter stemmer (used by the METEOR stem stage)
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Count of vowel-consonant sequences, the m of the Porter rules."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        vowel = not _is_consonant(stem, i)
        if prev_vowel and not vowel:
            m += 1
        prev_vowel = vowel
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
    ):
        return False
    return word[-1] not in "wxy"


_STEP2 = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
    ("logi", "log"),
]

_STEP3 = [
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
]

_STEP4 = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def porter_stem(word: str) -> str:
    """Porter's suffix-stripping algorithm; lowercases its input."""
    word = word.lower()
    if len(word) <= 2:
        return word

    # Step 1a
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif word.endswith("ss"):
        pass
    elif word.endswith("s"):
        word = word[:-1]

    # Step 1b
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        fired = False
        for suffix in ("ed", "ing"):
            if word.endswith(suffix) and _has_vowel(word[: -len(suffix)]):
                word = word[: -len(suffix)]
                fired = True
                break
        if fired:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # Step 1c
    if word.endswith("y") and _has_vowel(word[:-1]):
        word = word[:-1] + "i"

    # Step 2
    for suffix, replacement in _STEP2:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) > 0:
                word = stem + replacement
            break

    # Step 3
    for suffix, replacement in _STEP3:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) > 0:
                word = stem + replacement
            break

    # Step 4
    for suffix in _STEP4:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and (not stem or stem[-1] not in "st"):
                    continue
                word = stem
            break

    # Step 5a
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # Step 5b
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]

    return word


# ---------------------------------------------------------------------------
# METEOR
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeteorConfig:
    """METEOR parameters; the synonym stage is off unless a map is given."""

    alpha: float = 0.9
    beta: float = 3.0
    gamma: float = 0.5
    stem: bool = True
    synonyms: Mapping[str, frozenset[str]] | None = None


def load_synonyms(path: str | Path) -> dict[str, frozenset[str]]:
    """Read a "word TAB synonym" file into a symmetric synonym map."""
    groups: dict[str, set[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise MetricError(f"synonym line not 'word<TAB>synonym': {line!r}")
            a, b = parts
            groups.setdefault(a, set()).add(b)
            groups.setdefault(b, set()).add(a)
    return {word: frozenset(syns) for word, syns in groups.items()}


def _align_pair(
    hypothesis: Sequence[str], reference: Sequence[str], config: MeteorConfig
) -> list[tuple[int, int]]:
    """Greedy staged unigram alignment: exact, then stem, then synonym.

    Within a stage, hypothesis tokens are scanned left to right and
    matched to the earliest compatible unmatched reference token.
    """
    hyp_match: list[int | None] = [None] * len(hypothesis)
    ref_used = [False] * len(reference)

    def run_stage(equal) -> None:
        for i, h in enumerate(hypothesis):
            if hyp_match[i] is not None:
                continue
            for j, r in enumerate(reference):
                if not ref_used[j] and equal(h, r):
                    hyp_match[i] = j
                    ref_used[j] = True
                    break

    run_stage(lambda h, r: h == r)
    if config.stem:
        run_stage(lambda h, r: porter_stem(h) == porter_stem(r))
    if config.synonyms is not None:
        synonyms = config.synonyms
        run_stage(
            lambda h, r: r in synonyms.get(h, frozenset())
            or h in synonyms.get(r, frozenset())
        )
    return [(i, j) for i, j in enumerate(hyp_match) if j is not None]


def _count_chunks(matches: list[tuple[int, int]]) -> int:
    chunks = 0
    prev: tuple[int, int] | None = None
    for h, r in matches:  # already sorted by hypothesis position
        if prev is None or h != prev[0] + 1 or r != prev[1] + 1:
            chunks += 1
        prev = (h, r)
    return chunks


def meteor_pair(
    hypothesis: Sequence[str],
    reference: Sequence[str],
    config: MeteorConfig | None = None,
) -> float:
    """METEOR score of one pair in [0, 1]; zero-match pairs score 0."""
    config = config or MeteorConfig()
    if not hypothesis or not reference:
        return 0.0
    matches = _align_pair(hypothesis, reference, config)
    m = len(matches)
    if m == 0:
        return 0.0
    precision = m / len(hypothesis)
    recall = m / len(reference)
    fmean = (precision * recall) / (
        config.alpha * precision + (1.0 - config.alpha) * recall
    )
    chunks = _count_chunks(matches)
    penalty = config.gamma * (chunks / m) ** config.beta
    return fmean * (1.0 - penalty)


def meteor(pairs: Sequence[EvalPair], config: MeteorConfig | None = None) -> float:
    """Corpus METEOR in [0, 1]: mean pair score."""
    if not pairs:
        raise MetricError("meteor() needs at least one pair")
    config = config or MeteorConfig()
    total = sum(meteor_pair(p.hypothesis, p.reference, config) for p in pairs)
    return total / len(pairs)


# ---------------------------------------------------------------------------
# Mean reciprocal rank
# ---------------------------------------------------------------------------


def mrr(queries: Sequence[RankedQuery]) -> float:
    """Mean of 1/rank; queries whose correct answer is absent contribute 0."""
    if not queries:
        raise MetricError("mrr() needs at least one query")
    total = sum(1.0 / q.rank for q in queries if q.rank is not None)
    return total / len(queries)


def rank_from_scores(scores: Sequence[float]) -> int:
    """Rank of the correct candidate in a score vector (index 0 = correct).

    Ties are broken pessimistically: the correct answer is ranked after
    every distractor with an equal score.
    """
    if not scores:
        raise MetricError("empty score vector")
    correct = scores[0]
    return 1 + sum(1 for s in scores[1:] if s >= correct)


# ---------------------------------------------------------------------------
# Mann-Whitney U
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UTestResult:
    u_a: float
    u_b: float
    z: float
    p: float
    p_exact: float | None = None

    @property
    def p_value(self) -> float:
        return self.p


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        midrank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = midrank
        i = j + 1
    return ranks


def _normal_sf(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _exact_permutation_p(ranks: list[float], n1: int) -> float:
    """Two-sided exact p: share of label permutations at least as extreme.

    Works on the fixed midrank vector, so ties are handled identically to
    the observed statistic.
    """
    n = len(ranks)
    mu = n1 * (n - n1) / 2.0
    observed = sum(ranks[:n1]) - n1 * (n1 + 1) / 2.0
    observed_dev = abs(observed - mu)
    extreme = 0
    total = 0
    offset = n1 * (n1 + 1) / 2.0
    for subset in itertools.combinations(range(n), n1):
        u = sum(ranks[i] for i in subset) - offset
        if abs(u - mu) >= observed_dev - 1e-12:
            extreme += 1
        total += 1
    return extreme / total


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> UTestResult:
    """Two-sided Mann-Whitney U test with midrank tie handling.

    The p-value uses the normal approximation with tie-corrected variance
    and a 0.5 continuity correction. For combined sizes up to
    EXACT_PERMUTATION_LIMIT the exact permutation p is also computed.
    """
    if not a or not b:
        raise MetricError("both samples must be non-empty")
    n1, n2 = len(a), len(b)
    n = n1 + n2
    values = list(a) + list(b)
    ranks = _midranks(values)
    u_a = sum(ranks[:n1]) - n1 * (n1 + 1) / 2.0
    u_b = n1 * n2 - u_a

    if len(set(values)) == 1:
        # No separation is possible; p is defined as 1.
        p_exact = 1.0 if n <= EXACT_PERMUTATION_LIMIT else None
        return UTestResult(u_a=u_a, u_b=u_b, z=0.0, p=1.0, p_exact=p_exact)

    tie_counts = Counter(values).values()
    tie_term = sum(t**3 - t for t in tie_counts)
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    mu = n1 * n2 / 2.0
    if variance <= 0:
        z = 0.0
        p = 1.0
    else:
        z = max(abs(u_a - mu) - 0.5, 0.0) / math.sqrt(variance)
        p = min(1.0, 2.0 * _normal_sf(z))

    p_exact = _exact_permutation_p(ranks, n1) if n <= EXACT_PERMUTATION_LIMIT else None
    return UTestResult(u_a=u_a, u_b=u_b, z=z, p=p, p_exact=p_exact)


# ---------------------------------------------------------------------------
# Performance-to-time ratio
# ---------------------------------------------------------------------------


def ptr(records: Sequence[PerfTimeRecord]) -> dict[str, float]:
    """Normalized performance over normalized fine-tuning time, per model.

    Both axes are scaled by their maximum over the record set, so the
    slowest model gets time 1 and the best-scoring model performance 1.
    """
    if not records:
        raise MetricError("ptr() needs at least one record")
    seen: set[str] = set()
    for record in records:
        if record.model in seen:
            raise MetricError(f"duplicate model id {record.model!r}")
        seen.add(record.model)
    max_perf = max(r.performance for r in records)
    if max_perf <= 0:
        raise MetricError("all performances are zero")
    max_time = max(r.seconds for r in records)
    return {
        r.model: (r.performance / max_perf) / (r.seconds / max_time)
        for r in records
    }


# ---------------------------------------------------------------------------
# Input loaders (aligned text files, JSONL pairs, ranking files)
# ---------------------------------------------------------------------------


def load_pairs_from_files(hyp_path: str | Path, ref_path: str | Path) -> list[EvalPair]:
    """Two aligned text files, one whitespace-tokenized sentence per line."""
    hyp_lines = Path(hyp_path).read_text(encoding="utf-8").splitlines()
    ref_lines = Path(ref_path).read_text(encoding="utf-8").splitlines()
    if len(hyp_lines) != len(ref_lines):
        raise MetricError(
            f"line counts differ: {len(hyp_lines)} hypotheses vs "
            f"{len(ref_lines)} references"
        )
    return [
        EvalPair(hypothesis=tuple(h.split()), reference=tuple(r.split()))
        for h, r in zip(hyp_lines, ref_lines)
    ]


def load_pairs_from_jsonl(path: str | Path) -> list[EvalPair]:
    """JSONL records {"hyp": ..., "ref": ...}; values may be strings or lists."""

    def as_tokens(value) -> tuple[str, ...]:
        if isinstance(value, str):
            return tuple(value.split())
        return tuple(value)

    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            if "hyp" not in record or "ref" not in record:
                raise MetricError(f"line {line_no}: needs 'hyp' and 'ref' fields")
            pairs.append(
                EvalPair(
                    hypothesis=as_tokens(record["hyp"]),
                    reference=as_tokens(record["ref"]),
                )
            )
    return pairs


def load_queries_from_jsonl(path: str | Path) -> list[RankedQuery]:
    """Ranking JSONL: either {"qid", "rank"} or {"qid", "scores": [...]}.

    Score vectors put the correct candidate at index 0; its rank is
    derived pessimistically via rank_from_scores.
    """
    queries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            qid = str(record.get("qid", line_no))
            if "rank" in record:
                rank = record["rank"]
                count = record.get("candidates", 1000)
                queries.append(
                    RankedQuery(query_id=qid, candidate_count=count, rank=rank)
                )
            elif "scores" in record:
                scores = record["scores"]
                queries.append(
                    RankedQuery(
                        query_id=qid,
                        candidate_count=len(scores),
                        rank=rank_from_scores(scores),
                    )
                )
            else:
                raise MetricError(f"line {line_no}: needs 'rank' or 'scores'")
    return queries
