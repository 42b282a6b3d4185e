"""Plaintext token normalization shared by embeddings and clone detection.

Code is treated as flat text: maximal runs of ``[A-Za-z0-9_]`` become one
token, every other non-whitespace character becomes a single-character
token, and all whitespace (including line breaks) only separates tokens.
No language grammar, no comment or string awareness.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .corpus import Corpus, CorpusDocument

# Bumped whenever the normalization rules change; recorded in report
# provenance so scores from different tokenizer revisions never mix.
TOKENIZER_VERSION = "plaintext-1"

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+|[^\sA-Za-z0-9_]")


@dataclass(frozen=True)
class TokenStream:
    """Normalized token sequence of one document."""

    doc_id: str
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def normalize_plaintext(code: str) -> list[str]:
    """Split raw source text into plaintext-mode tokens.

    Deterministic, whitespace never survives into a token, and
    ``normalize(a + "\\n" + b) == normalize(a) + normalize(b)``.
    """
    return _TOKEN_RE.findall(code)


def tokenize_document(doc: "CorpusDocument") -> TokenStream:
    """Normalize one document's code into a TokenStream."""
    return TokenStream(doc_id=doc.id, tokens=tuple(normalize_plaintext(doc.code)))


def tokenize_corpus(corpus: "Corpus") -> list[TokenStream]:
    """Normalize every document of a corpus, preserving document order."""
    return [tokenize_document(doc) for doc in corpus.documents]


def length_of(doc: "CorpusDocument") -> int:
    """Code length in normalized tokens (the unit used for length binning)."""
    return len(normalize_plaintext(doc.code))
