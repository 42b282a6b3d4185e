"""Cross-corpus token-level clone detection in plaintext mode.

A clone pair is a maximal pair of exactly equal token runs, one fragment
per corpus: extending both fragments one token left or right either
breaks equality or crosses a document boundary. Detection builds a
suffix array over the concatenation of all token streams (every document
flanked by a globally unique sentinel, so matches can never span
documents) and enumerates left-maximal cross-corpus pairs bottom-up over
the LCP-interval tree. The enumeration is output-sensitive; a pair cap
can cut it short, marking the result truncated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .corpus import Corpus
from .embedding import EmbeddingError, SimilarityScoreMap, normalize_scores
from .tokens import normalize_plaintext

DEFAULT_MIN_TOKENS = 30


class CloneError(Exception):
    """Invalid parameters or a degenerate score map."""


@dataclass(frozen=True)
class CloneParams:
    min_tokens: int = DEFAULT_MIN_TOKENS

    def __post_init__(self) -> None:
        if self.min_tokens < 1:
            raise CloneError("min_tokens must be >= 1")


@dataclass(frozen=True, order=True)
class CloneFragment:
    doc_id: str
    start: int
    length: int


@dataclass(frozen=True, order=True)
class ClonePair:
    """One maximal matching token run; `a` lives in corpus A, `b` in B."""

    a: CloneFragment
    b: CloneFragment


@dataclass(frozen=True)
class CloneSet:
    pairs: tuple[ClonePair, ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[ClonePair]:
        return iter(self.pairs)


def _suffix_array(seq: np.ndarray) -> np.ndarray:
    """Suffix array by prefix doubling over integer tokens, O(n log^2 n)."""
    n = seq.size
    if n == 0:
        return np.empty(0, dtype=np.int64)
    rank = np.unique(seq, return_inverse=True)[1].astype(np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        second[: n - k] = rank[k:]
        order = np.lexsort((second, rank))
        first_sorted = rank[order]
        second_sorted = second[order]
        labels = np.zeros(n, dtype=np.int64)
        if n > 1:
            changed = (first_sorted[1:] != first_sorted[:-1]) | (
                second_sorted[1:] != second_sorted[:-1]
            )
            labels[1:] = np.cumsum(changed)
        new_rank = np.empty(n, dtype=np.int64)
        new_rank[order] = labels
        rank = new_rank
        if labels[-1] == n - 1:
            return order
        k *= 2


def _lcp_array(seq: list[int], sa: np.ndarray) -> np.ndarray:
    """Kasai: lcp[r] = common prefix length of suffixes sa[r-1] and sa[r]."""
    n = len(seq)
    rank = np.empty(n, dtype=np.int64)
    rank[sa] = np.arange(n)
    lcp = np.zeros(n, dtype=np.int64)
    k = 0
    for i in range(n):
        r = rank[i]
        if r == 0:
            k = 0
            continue
        j = int(sa[r - 1])
        while i + k < n and j + k < n and seq[i + k] == seq[j + k]:
            k += 1
        lcp[r] = k
        if k:
            k -= 1
    return lcp


class _Concatenation:
    """Both corpora interned to ints, docs flanked by unique sentinels."""

    def __init__(self, corpus_a: Corpus, corpus_b: Corpus):
        intern: dict[str, int] = {}
        seq: list[int] = []
        # side: 0 = corpus A, 1 = corpus B, -1 = sentinel
        side: list[int] = []
        doc_ids: list[str] = []
        doc_index: list[int] = []
        offset: list[int] = []
        next_sentinel = -1

        for corpus_side, corpus in ((0, corpus_a), (1, corpus_b)):
            for doc in corpus.documents:
                seq.append(next_sentinel)
                side.append(-1)
                doc_index.append(-1)
                offset.append(-1)
                next_sentinel -= 1
                tokens = normalize_plaintext(doc.code)
                if not tokens:
                    continue
                doc_ids.append(doc.id)
                current = len(doc_ids) - 1
                for pos, token in enumerate(tokens):
                    code = intern.setdefault(token, len(intern))
                    seq.append(code)
                    side.append(corpus_side)
                    doc_index.append(current)
                    offset.append(pos)
        seq.append(next_sentinel)
        side.append(-1)
        doc_index.append(-1)
        offset.append(-1)

        self.seq = seq
        self.side = side
        self.doc_ids = doc_ids
        self.doc_index = doc_index
        self.offset = offset

    def fragment(self, pos: int, length: int) -> CloneFragment:
        return CloneFragment(
            doc_id=self.doc_ids[self.doc_index[pos]],
            start=self.offset[pos],
            length=length,
        )


class _CapReached(Exception):
    pass


class _Collector:
    def __init__(self, concat: _Concatenation, cap: int | None):
        self.concat = concat
        self.cap = cap
        self.pairs: list[ClonePair] = []

    def emit(self, pos_x: int, pos_y: int, length: int) -> None:
        if self.concat.side[pos_x] == 0:
            pos_a, pos_b = pos_x, pos_y
        else:
            pos_a, pos_b = pos_y, pos_x
        self.pairs.append(
            ClonePair(
                a=self.concat.fragment(pos_a, length),
                b=self.concat.fragment(pos_b, length),
            )
        )
        if self.cap is not None and len(self.pairs) >= self.cap:
            raise _CapReached


# Group key: (side, preceding token). Document starts are preceded by a
# unique sentinel, so two doc-start fragments always count as left-maximal.
_Groups = dict[tuple[int, int], list[int]]


def _emit_cross(
    child: _Groups, parent: _Groups, depth: int, collector: _Collector
) -> None:
    for (side_c, left_c), positions_c in child.items():
        for (side_p, left_p), positions_p in parent.items():
            if side_c == side_p or left_c == left_p:
                continue
            for x in positions_c:
                for y in positions_p:
                    collector.emit(x, y, depth)


def _merge(child: _Groups, parent: _Groups) -> None:
    for key, positions in child.items():
        existing = parent.get(key)
        if existing is None:
            parent[key] = positions
        else:
            existing.extend(positions)


def _enumerate_pairs(
    concat: _Concatenation, min_tokens: int, collector: _Collector
) -> None:
    seq = concat.seq
    n = len(seq)
    sa = _suffix_array(np.asarray(seq, dtype=np.int64))
    lcp = _lcp_array(seq, sa)

    # Stack of (depth, groups); bottom-up walk of the LCP-interval tree.
    stack: list[tuple[int, _Groups]] = [(0, {})]

    def close_to(h: int) -> None:
        while stack[-1][0] > h:
            _, child_groups = stack.pop()
            parent_depth, parent_groups = stack[-1]
            if parent_depth >= h:
                if parent_depth >= min_tokens:
                    _emit_cross(child_groups, parent_groups, parent_depth, collector)
                _merge(child_groups, parent_groups)
            else:
                stack.append((h, child_groups))
                return

    for r in range(n):
        close_to(int(lcp[r]))
        pos = int(sa[r])
        if concat.side[pos] < 0:
            continue  # sentinel suffixes never match anything
        left = seq[pos - 1] if pos > 0 else -(10**9)
        leaf: _Groups = {(concat.side[pos], left): [pos]}
        stack.append((n - pos, leaf))
    close_to(0)


def detect_cross_clones(
    corpus_a: Corpus,
    corpus_b: Corpus,
    params: CloneParams | None = None,
    cap: int | None = None,
) -> CloneSet:
    """All maximal cross-corpus clone pairs of length >= min_tokens.

    The result is order-independent: pairs come back sorted. With a cap
    the enumeration stops early and the set is flagged truncated ("at
    least N" semantics).
    """
    params = params or CloneParams()
    concat = _Concatenation(corpus_a, corpus_b)
    collector = _Collector(concat, cap)
    truncated = False
    if concat.doc_ids:
        try:
            _enumerate_pairs(concat, params.min_tokens, collector)
        except _CapReached:
            truncated = True
    return CloneSet(pairs=tuple(sorted(collector.pairs)), truncated=truncated)


def textual_similarity(
    corpus_a: Corpus,
    target: Corpus,
    params: CloneParams | None = None,
    cap: int | None = None,
) -> int:
    """Number of cross-corpus clone pairs between a candidate and the target."""
    return len(detect_cross_clones(corpus_a, target, params, cap))


def normalize_clone_counts(raw: Mapping[str, int]) -> SimilarityScoreMap:
    """Scale clone counts so the largest count maps to exactly 1."""
    try:
        return normalize_scores({language: float(v) for language, v in raw.items()})
    except EmbeddingError as exc:
        raise CloneError(f"no textual signal: {exc}") from exc


def export_jsonl(clones: CloneSet, path: str | Path) -> None:
    """One pair per line: {a_doc, a_start, len, b_doc, b_start}."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in clones.pairs:
            fh.write(
                json.dumps(
                    {
                        "a_doc": pair.a.doc_id,
                        "a_start": pair.a.start,
                        "len": pair.a.length,
                        "b_doc": pair.b.doc_id,
                        "b_start": pair.b.start,
                    }
                )
                + "\n"
            )
