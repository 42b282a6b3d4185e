"""CodeSearchNet-style corpus ingestion and the combined multilingual corpus.

A corpus is an ordered, immutable collection of code units (one function
each, with an optional natural-language docstring). JSONL field names
follow the CodeSearchNet convention; unknown fields are ignored.
"""

from __future__ import annotations

import gzip
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .tokens import length_of

SPLITS = ("train", "valid", "test", "unsplit")

COMBINED_TAG = "combined"


class CorpusError(Exception):
    """Unreadable input, malformed JSONL, or a violated corpus invariant."""


@dataclass(frozen=True)
class CorpusDocument:
    """One code unit: a function plus an optional docstring."""

    id: str
    language: str
    split: str
    code: str
    docstring: str | None = None
    code_tokens: tuple[str, ...] | None = None
    docstring_tokens: tuple[str, ...] | None = None
    line_no: int | None = None  # 1-based line in the source file, for diagnostics

    def __post_init__(self) -> None:
        if not self.code:
            raise CorpusError(f"document {self.id!r}: code must be non-empty")
        if self.split not in SPLITS:
            raise CorpusError(f"document {self.id!r}: unknown split {self.split!r}")

    @property
    def is_bimodal(self) -> bool:
        """True when the document carries a non-empty docstring."""
        return bool(self.docstring)


@dataclass
class Corpus:
    """Language- and split-tagged ordered collection of documents."""

    language: str
    documents: list[CorpusDocument] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
            if self.language != COMBINED_TAG and doc.language != self.language:
                raise CorpusError(
                    f"document {doc.id!r} tagged {doc.language!r} in a "
                    f"{self.language!r} corpus"
                )

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[CorpusDocument]:
        return iter(self.documents)

    def fingerprint(self) -> str:
        """Content hash over all documents; keys caching and provenance."""
        h = hashlib.sha256()
        h.update(self.language.encode())
        for doc in self.documents:
            payload = json.dumps(
                [doc.id, doc.language, doc.split, doc.code, doc.docstring],
                ensure_ascii=False,
            )
            h.update(payload.encode())
            h.update(b"\x00")
        return h.hexdigest()


@dataclass(frozen=True)
class CorpusStats:
    """Summary counts and normalized-token-length quantiles."""

    total: int
    per_split: dict[str, int]
    bimodal: int
    unimodal: int
    length_min: float
    length_q1: float
    length_median: float
    length_q3: float
    length_max: float


def _open_text(path: str | Path) -> io.TextIOBase:
    p = Path(path)
    if p.suffix == ".gz":
        return gzip.open(p, "rt", encoding="utf-8")  # type: ignore[return-value]
    return open(p, "r", encoding="utf-8")


def _doc_from_record(
    record: dict, language: str, split: str, line_no: int, fallback_id: str
) -> CorpusDocument:
    code = record.get("code") or record.get("original_string")
    if not code or not isinstance(code, str):
        raise CorpusError(f"line {line_no}: missing required 'code'/'original_string' field")
    doc_id = record.get("id") or record.get("url") or fallback_id
    code_tokens = record.get("code_tokens")
    docstring_tokens = record.get("docstring_tokens")
    return CorpusDocument(
        id=str(doc_id),
        language=language,
        split=split,
        code=code,
        docstring=record.get("docstring"),
        code_tokens=tuple(code_tokens) if code_tokens is not None else None,
        docstring_tokens=tuple(docstring_tokens) if docstring_tokens is not None else None,
        line_no=line_no,
    )


def load_jsonl(
    path: str | Path,
    language: str,
    split: str = "unsplit",
    lenient: bool = False,
) -> Corpus:
    """Load one JSONL file into a Corpus.

    Every line must be a standalone JSON object with a ``code`` (or
    ``original_string``) field. With ``lenient`` bad lines are skipped,
    otherwise the first bad line aborts the load with its line number.
    """
    p = Path(path)
    if not p.exists():
        raise CorpusError(f"no such file: {p}")
    documents: list[CorpusDocument] = []
    try:
        fh = _open_text(p)
    except OSError as exc:
        raise CorpusError(f"cannot read {p}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise CorpusError(f"line {line_no}: not a JSON object")
                doc = _doc_from_record(
                    record, language, split, line_no,
                    fallback_id=f"{language}:{p.name}:{line_no}",
                )
            except (json.JSONDecodeError, CorpusError) as exc:
                if lenient:
                    continue
                raise CorpusError(f"{p}: line {line_no}: {exc}") from exc
            documents.append(doc)
    return Corpus(language=language, documents=documents, provenance=[str(p)])


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Round-trip writer: emits the same field names load_jsonl reads."""
    p = Path(path)
    opener = gzip.open if p.suffix == ".gz" else open
    with opener(p, "wt", encoding="utf-8") as fh:  # type: ignore[operator]
        for doc in corpus.documents:
            record: dict = {
                "id": doc.id,
                "language": doc.language,
                "code": doc.code,
            }
            if doc.docstring is not None:
                record["docstring"] = doc.docstring
            if doc.code_tokens is not None:
                record["code_tokens"] = list(doc.code_tokens)
            if doc.docstring_tokens is not None:
                record["docstring_tokens"] = list(doc.docstring_tokens)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def combine(corpora: Sequence[Corpus]) -> Corpus:
    """Concatenate corpora into one "combined" corpus, order preserved.

    Ids colliding across inputs are re-prefixed with their language tag;
    a collision surviving that is an error.
    """
    if not corpora:
        raise CorpusError("combine() needs at least one corpus")
    documents: list[CorpusDocument] = []
    provenance: list[str] = []
    seen: set[str] = set()
    for corpus in corpora:
        provenance.extend(corpus.provenance)
        for doc in corpus.documents:
            if doc.id in seen:
                new_id = f"{doc.language}:{doc.id}"
                if new_id in seen:
                    raise CorpusError(f"id collision not resolvable: {doc.id!r}")
                doc = CorpusDocument(
                    id=new_id,
                    language=doc.language,
                    split=doc.split,
                    code=doc.code,
                    docstring=doc.docstring,
                    code_tokens=doc.code_tokens,
                    docstring_tokens=doc.docstring_tokens,
                    line_no=doc.line_no,
                )
            seen.add(doc.id)
            documents.append(doc)
    return Corpus(language=COMBINED_TAG, documents=documents, provenance=provenance)


def _percentile(sorted_values: list[int], q: float) -> float:
    # Linear interpolation between closest ranks, same rule as quartile_bins.
    if not sorted_values:
        return 0.0
    if len(sorted_values) == 1:
        return float(sorted_values[0])
    pos = (len(sorted_values) - 1) * q / 100.0
    lo = int(pos)
    hi = min(lo + 1, len(sorted_values) - 1)
    frac = pos - lo
    return sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac


def stats(corpus: Corpus) -> CorpusStats:
    """Per-split counts, bimodal/unimodal counts, and token-length quantiles."""
    per_split = {split: 0 for split in SPLITS}
    bimodal = 0
    lengths: list[int] = []
    for doc in corpus.documents:
        per_split[doc.split] += 1
        if doc.is_bimodal:
            bimodal += 1
        lengths.append(length_of(doc))
    lengths.sort()
    total = len(corpus.documents)
    return CorpusStats(
        total=total,
        per_split=per_split,
        bimodal=bimodal,
        unimodal=total - bimodal,
        length_min=float(lengths[0]) if lengths else 0.0,
        length_q1=_percentile(lengths, 25),
        length_median=_percentile(lengths, 50),
        length_q3=_percentile(lengths, 75),
        length_max=float(lengths[-1]) if lengths else 0.0,
    )


def filter_bimodal(corpus: Corpus) -> Corpus:
    """Restrict a corpus to documents that carry a docstring."""
    return Corpus(
        language=corpus.language,
        documents=[d for d in corpus.documents if d.is_bimodal],
        provenance=list(corpus.provenance),
    )


def iter_code(corpus: Corpus) -> Iterable[str]:
    for doc in corpus.documents:
        yield doc.code
