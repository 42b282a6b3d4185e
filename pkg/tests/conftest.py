import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from langsel.corpus import Corpus, CorpusDocument


def make_doc(doc_id, code, language="x", split="unsplit", docstring=None):
    return CorpusDocument(
        id=doc_id, language=language, split=split, code=code, docstring=docstring
    )


def make_corpus(language, codes, split="unsplit"):
    docs = [
        make_doc(f"{language}-{i}", code, language=language, split=split)
        for i, code in enumerate(codes)
    ]
    return Corpus(language=language, documents=docs)


@pytest.fixture
def tiny_corpus():
    return make_corpus("ruby", ["def add(a, b)\n  a + b\nend", "puts 'hi'"])
