"""Independent reference implementations used to check the fast paths.

Everything here deliberately takes a different route from the package:
clone detection by quadratic extension-length DP, mean pairwise cosine
by literal pair enumeration, and the U statistic by pair counting.
"""

from __future__ import annotations

import itertools

import numpy as np

from langsel.corpus import Corpus
from langsel.tokens import normalize_plaintext

CloneTuple = tuple[str, int, str, int, int]  # (a_doc, a_start, b_doc, b_start, len)


def naive_cross_clones(corpus_a: Corpus, corpus_b: Corpus, min_tokens: int) -> set[CloneTuple]:
    """All maximal cross-corpus equal runs, by brute-force extension DP.

    E[i, j] is the length of the longest equal run starting at (i, j);
    a pair is reported when E >= min_tokens and the preceding tokens
    differ (or either fragment starts its document).
    """
    docs_a = [(doc.id, normalize_plaintext(doc.code)) for doc in corpus_a.documents]
    docs_b = [(doc.id, normalize_plaintext(doc.code)) for doc in corpus_b.documents]
    pairs: set[CloneTuple] = set()
    for id_a, toks_a in docs_a:
        for id_b, toks_b in docs_b:
            if not toks_a or not toks_b:
                continue
            vocab: dict[str, int] = {}
            ia = np.array([vocab.setdefault(t, len(vocab)) for t in toks_a])
            ib = np.array([vocab.setdefault(t, len(vocab)) for t in toks_b])
            la, lb = len(ia), len(ib)
            match = ia[:, None] == ib[None, :]
            ext = np.zeros((la + 1, lb + 1), dtype=np.int64)
            for i in range(la - 1, -1, -1):
                ext[i, :lb] = np.where(match[i], ext[i + 1, 1 : lb + 1] + 1, 0)
            left_maximal = np.ones((la, lb), dtype=bool)
            left_maximal[1:, 1:] = ia[:-1, None] != ib[None, :-1]
            keep = (ext[:la, :lb] >= min_tokens) & left_maximal
            for i, j in zip(*np.nonzero(keep)):
                pairs.add((id_a, int(i), id_b, int(j), int(ext[i, j])))
    return pairs


def clone_set_as_tuples(clone_set) -> set[CloneTuple]:
    return {
        (p.a.doc_id, p.a.start, p.b.doc_id, p.b.start, p.a.length)
        for p in clone_set.pairs
    }


def brute_force_mean_cosine(vectors_a, vectors_b) -> float:
    """Literal average of cos(u, v) over the full cross product."""
    total = 0.0
    count = 0
    for u in vectors_a:
        for v in vectors_b:
            u64 = np.asarray(u, dtype=np.float64)
            v64 = np.asarray(v, dtype=np.float64)
            total += float(
                np.dot(u64, v64) / (np.linalg.norm(u64) * np.linalg.norm(v64))
            )
            count += 1
    return total / count


def counting_u_statistic(sample_a, sample_b) -> float:
    """U by direct pair counting: wins plus half-ties for sample A."""
    u = 0.0
    for x in sample_a:
        for y in sample_b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def exact_permutation_p(sample_a, sample_b) -> float:
    """Two-sided permutation p via exhaustive label reassignment."""
    values = list(sample_a) + list(sample_b)
    n1 = len(sample_a)
    n = len(values)
    mu = n1 * (n - n1) / 2.0
    observed = abs(counting_u_statistic(sample_a, sample_b) - mu)
    extreme = 0
    total = 0
    for subset in itertools.combinations(range(n), n1):
        chosen = set(subset)
        sa = [values[i] for i in subset]
        sb = [values[i] for i in range(n) if i not in chosen]
        if abs(counting_u_statistic(sa, sb) - mu) >= observed - 1e-12:
            extreme += 1
        total += 1
    return extreme / total
