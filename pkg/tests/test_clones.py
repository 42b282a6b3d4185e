import json
import random

import pytest

from langsel.clones import (
    CloneError,
    CloneParams,
    detect_cross_clones,
    export_jsonl,
    normalize_clone_counts,
    textual_similarity,
)
from langsel.tokens import normalize_plaintext

from conftest import make_corpus
from oracles import clone_set_as_tuples, naive_cross_clones


def random_corpus(rng, language, n_docs, max_len, vocab):
    codes = []
    for _ in range(n_docs):
        length = rng.randint(1, max_len)
        codes.append(" ".join(rng.choice(vocab) for _ in range(length)))
    return make_corpus(language, codes)


def test_disjoint_vocabularies_have_no_clones():
    a = make_corpus("a", ["x y z x y", "z z y"])
    b = make_corpus("b", ["p q r", "r q p q"])
    assert len(detect_cross_clones(a, b, CloneParams(min_tokens=1))) == 0
    assert textual_similarity(a, b, CloneParams(min_tokens=1)) == 0


def test_identical_30_token_documents_yield_one_full_pair():
    tokens = [f"t{i}" for i in range(30)]
    code = " ".join(tokens)
    a = make_corpus("a", [code])
    b = make_corpus("b", [code])
    result = detect_cross_clones(a, b, CloneParams(min_tokens=30))
    assert len(result) == 1
    pair = result.pairs[0]
    assert (pair.a.start, pair.b.start, pair.a.length) == (0, 0, 30)
    assert pair.a.length == pair.b.length


def test_planted_shared_run_counts_once():
    shared = " ".join(f"s{i}" for i in range(30))
    a = make_corpus("a", [f"alpha beta {shared} gamma"])
    b = make_corpus("b", [f"delta {shared} epsilon zeta"])
    result = detect_cross_clones(a, b, CloneParams(min_tokens=30))
    assert len(result) == 1
    pair = result.pairs[0]
    assert pair.a.length == 30
    assert pair.a.start == 2
    assert pair.b.start == 1


def test_empty_corpora_yield_empty_set():
    a = make_corpus("a", [])
    b = make_corpus("b", ["x y"])
    assert len(detect_cross_clones(a, b)) == 0
    assert len(detect_cross_clones(b, a)) == 0


def test_overlapping_repeats_match_oracle():
    # Repetitive text stresses maximality: many overlapping candidate runs.
    a = make_corpus("a", ["a b a b a b a", "b a b"])
    b = make_corpus("b", ["a b a b", "b a b a b a"])
    params = CloneParams(min_tokens=2)
    got = clone_set_as_tuples(detect_cross_clones(a, b, params))
    want = naive_cross_clones(a, b, 2)
    assert got == want


def test_randomized_oracle_equivalence():
    rng = random.Random(1234)
    for trial in range(40):
        vocab = [f"v{i}" for i in range(rng.choice([2, 3, 5, 9]))]
        a = random_corpus(rng, "a", rng.randint(1, 8), 40, vocab)
        b = random_corpus(rng, "b", rng.randint(1, 8), 40, vocab)
        min_tokens = rng.choice([1, 2, 3, 5])
        got = clone_set_as_tuples(detect_cross_clones(a, b, CloneParams(min_tokens)))
        want = naive_cross_clones(a, b, min_tokens)
        assert got == want, f"trial {trial} diverged"


def test_symmetry_with_roles_swapped():
    rng = random.Random(7)
    vocab = ["x", "y", "z"]
    a = random_corpus(rng, "a", 5, 25, vocab)
    b = random_corpus(rng, "b", 5, 25, vocab)
    params = CloneParams(min_tokens=3)
    forward = clone_set_as_tuples(detect_cross_clones(a, b, params))
    backward = clone_set_as_tuples(detect_cross_clones(b, a, params))
    assert forward == {(bd, bs, ad, as_, ln) for (ad, as_, bd, bs, ln) in backward}


def test_min_tokens_monotonicity():
    rng = random.Random(99)
    vocab = ["p", "q"]
    a = random_corpus(rng, "a", 4, 30, vocab)
    b = random_corpus(rng, "b", 4, 30, vocab)
    counts = [
        textual_similarity(a, b, CloneParams(min_tokens=m)) for m in (1, 2, 4, 8)
    ]
    assert counts == sorted(counts, reverse=True)


def test_reported_pairs_are_equal_and_maximal():
    rng = random.Random(5)
    vocab = ["u", "w", "k"]
    a = random_corpus(rng, "a", 6, 30, vocab)
    b = random_corpus(rng, "b", 6, 30, vocab)
    tokens_a = {d.id: normalize_plaintext(d.code) for d in a.documents}
    tokens_b = {d.id: normalize_plaintext(d.code) for d in b.documents}
    result = detect_cross_clones(a, b, CloneParams(min_tokens=2))
    assert len(result) > 0, "fixture should produce clones"
    for pair in result:
        ta = tokens_a[pair.a.doc_id]
        tb = tokens_b[pair.b.doc_id]
        i, j, length = pair.a.start, pair.b.start, pair.a.length
        assert ta[i : i + length] == tb[j : j + length]
        left_blocked = i == 0 or j == 0 or ta[i - 1] != tb[j - 1]
        right_blocked = (
            i + length == len(ta)
            or j + length == len(tb)
            or ta[i + length] != tb[j + length]
        )
        assert left_blocked and right_blocked


def test_clones_never_span_documents():
    # "x y" at the end of one doc and start of the next must not merge.
    a = make_corpus("a", ["p p x y", "x y q q"])
    b = make_corpus("b", ["x y x y"])
    result = detect_cross_clones(a, b, CloneParams(min_tokens=2))
    for pair in result:
        assert pair.a.length <= 4


def test_cap_truncates_with_flag():
    a = make_corpus("a", ["r r r r r r r r"])
    b = make_corpus("b", ["r r r r r r r r"])
    full = detect_cross_clones(a, b, CloneParams(min_tokens=1))
    capped = detect_cross_clones(a, b, CloneParams(min_tokens=1), cap=2)
    assert not full.truncated
    assert capped.truncated
    assert len(capped) == 2
    assert len(full) > 2


def test_normalize_clone_counts():
    scores = normalize_clone_counts({"a": 10, "b": 40})
    assert scores.normalized == pytest.approx({"a": 0.25, "b": 1.0})
    assert normalize_clone_counts({"only": 3}).normalized == {"only": 1.0}


def test_normalize_all_zero_counts_is_no_textual_signal():
    with pytest.raises(CloneError, match="no textual signal"):
        normalize_clone_counts({"a": 0, "b": 0})


def test_export_jsonl(tmp_path):
    tokens = " ".join(f"t{i}" for i in range(5))
    a = make_corpus("a", [tokens])
    b = make_corpus("b", [tokens])
    result = detect_cross_clones(a, b, CloneParams(min_tokens=5))
    path = tmp_path / "clones.jsonl"
    export_jsonl(result, path)
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert records == [
        {"a_doc": "a-0", "a_start": 0, "len": 5, "b_doc": "b-0", "b_start": 0}
    ]


def test_min_tokens_must_be_positive():
    with pytest.raises(CloneError):
        CloneParams(min_tokens=0)


def test_suffix_array_matches_sorted_suffixes():
    from langsel.clones import _suffix_array
    import numpy as np

    rng = random.Random(21)
    for _ in range(50):
        seq = [rng.randint(-3, 3) for _ in range(rng.randint(0, 60))]
        got = list(_suffix_array(np.asarray(seq, dtype=np.int64)))
        want = sorted(range(len(seq)), key=lambda i: seq[i:])
        assert got == want


def test_lcp_array_matches_pairwise_common_prefix():
    from langsel.clones import _lcp_array, _suffix_array
    import numpy as np

    rng = random.Random(22)
    for _ in range(30):
        seq = [rng.randint(-1000, 1000) // 300 for _ in range(rng.randint(1, 80))]
        sa = _suffix_array(np.asarray(seq, dtype=np.int64))
        lcp = _lcp_array(seq, sa)
        assert lcp[0] == 0
        for r in range(1, len(seq)):
            a, b = seq[sa[r - 1]:], seq[sa[r]:]
            expected = 0
            while (expected < len(a) and expected < len(b)
                   and a[expected] == b[expected]):
                expected += 1
            assert lcp[r] == expected


def test_raising_threshold_filters_by_length():
    # maximality is threshold-independent: the high-threshold set is exactly
    # the low-threshold set with short pairs dropped
    rng = random.Random(23)
    vocab = ["m", "n", "o"]
    a = random_corpus(rng, "a", 5, 35, vocab)
    b = random_corpus(rng, "b", 5, 35, vocab)
    low = detect_cross_clones(a, b, CloneParams(min_tokens=2))
    high = detect_cross_clones(a, b, CloneParams(min_tokens=6))
    assert set(high.pairs) == {p for p in low.pairs if p.a.length >= 6}
