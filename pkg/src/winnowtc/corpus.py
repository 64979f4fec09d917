"""Corpus ingestion: tokenization, vocabulary building, sparse vectorization.

Documents are bags of word features. A vocabulary maps each retained token
to a dense feature id and remembers corpus counts plus the average number
of distinct active features per document (used to set initial weights).
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from math import sqrt
from pathlib import Path
from typing import Callable, Iterable, Sequence

__all__ = [
    "CorpusFormatError",
    "RawDocument",
    "SparseVector",
    "StrengthMode",
    "Vocabulary",
    "build_vocabulary",
    "normalize",
    "read_corpus",
    "tokenize",
    "vectorize",
    "vocabulary_hash",
    "write_corpus",
]

# Maximal runs of letters (unicode-aware: word chars minus digits/underscore).
_TOKEN_RE = re.compile(r"[^\W\d_]+")

_MIN_TOKEN_LEN = 2


class CorpusFormatError(ValueError):
    """A corpus or vocabulary file does not parse."""


def tokenize(text: str) -> list[str]:
    """Split text into lowercased alphabetic tokens, in document order.

    Runs of non-letters separate tokens; tokens shorter than two
    characters are dropped (single letters carry no signal here).
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= _MIN_TOKEN_LEN]


# A pluggable tokenizer type, so a lemmatizing pipeline can be swapped in.
Tokenizer = Callable[[str], list[str]]


@dataclass(frozen=True)
class RawDocument:
    """An input document: id, raw text, and zero or more category labels.

    A document with empty labels is a negative example for every category.
    """

    doc_id: str
    text: str
    labels: frozenset[str] = frozenset()


@dataclass(frozen=True)
class SparseVector:
    """Sorted (feature-id, strength) pairs; strengths are strictly positive."""

    pairs: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        last = -1
        for fid, s in self.pairs:
            if fid <= last:
                raise ValueError("feature ids must be strictly ascending")
            if not s > 0.0:
                raise ValueError(f"strength for feature {fid} must be > 0, got {s}")
            last = fid

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def total_strength(self) -> float:
        return sum(s for _, s in self.pairs)

    @classmethod
    def from_dict(cls, strengths: dict[int, float]) -> "SparseVector":
        return cls(tuple(sorted((f, s) for f, s in strengths.items() if s > 0.0)))


class StrengthMode(Enum):
    """How a feature's in-document occurrence count maps to its strength."""

    BINARY = "binary"
    LINEAR = "linear"
    SQRT = "sqrt"


@dataclass
class Vocabulary:
    """Token -> (feature id, corpus count) map, frozen after construction.

    Feature ids are contiguous 0..n-1 in first-occurrence order.
    ``avg_active`` is the mean number of distinct retained tokens per
    training document.
    """

    entries: dict[str, tuple[int, int]]
    min_frequency: int
    avg_active: float

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def feature_id(self, token: str) -> int | None:
        entry = self.entries.get(token)
        return entry[0] if entry is not None else None


def build_vocabulary(
    docs: Sequence[RawDocument],
    min_frequency: int = 3,
    tokenizer: Tokenizer = tokenize,
) -> Vocabulary:
    """Count tokens over the corpus and retain those occurring often enough.

    Counts are total token occurrences (a token appearing twice in one
    document counts twice). Ids are assigned in order of first occurrence
    in the corpus stream.
    """
    if min_frequency < 1:
        raise ValueError(f"min_frequency must be >= 1, got {min_frequency}")
    if not docs:
        raise ValueError("empty corpus")

    counts: dict[str, int] = {}
    doc_tokens: list[set[str]] = []
    for doc in docs:
        tokens = tokenizer(doc.text)
        doc_tokens.append(set(tokens))
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1

    entries: dict[str, tuple[int, int]] = {}
    for tok, count in counts.items():  # dict preserves first-occurrence order
        if count >= min_frequency:
            entries[tok] = (len(entries), count)

    retained = set(entries)
    active = [len(toks & retained) for toks in doc_tokens]
    avg_active = sum(active) / len(active)
    if avg_active <= 0.0:
        raise ValueError(
            "empty vocabulary: no token reaches the minimum frequency "
            f"({min_frequency})"
        )
    return Vocabulary(entries=entries, min_frequency=min_frequency, avg_active=avg_active)


def vectorize(
    doc: RawDocument,
    vocab: Vocabulary,
    mode: StrengthMode = StrengthMode.BINARY,
    tokenizer: Tokenizer = tokenize,
) -> SparseVector:
    """Convert a document to sparse strengths under the chosen mode.

    Tokens outside the vocabulary are ignored; a document with no retained
    tokens becomes the empty vector.
    """
    occur = Counter(tokenizer(doc.text))
    pairs = []
    for tok, n in occur.items():
        entry = vocab.entries.get(tok)
        if entry is None:
            continue
        fid = entry[0]
        if mode is StrengthMode.BINARY:
            strength = 1.0
        elif mode is StrengthMode.LINEAR:
            strength = float(n)
        else:
            strength = sqrt(n)
        pairs.append((fid, strength))
    pairs.sort()
    return SparseVector(tuple(pairs))


def normalize(v: SparseVector) -> SparseVector:
    """Divide every strength by the vector's total so they sum to one.

    The empty vector is returned unchanged (it scores zero everywhere).
    """
    if not v.pairs:
        return v
    total = v.total_strength()
    return SparseVector(tuple((fid, s / total) for fid, s in v.pairs))


def vectorize_corpus(
    docs: Sequence[RawDocument],
    vocab: Vocabulary,
    mode: StrengthMode = StrengthMode.BINARY,
    normalized: bool = False,
    tokenizer: Tokenizer = tokenize,
) -> list[tuple[SparseVector, frozenset[str]]]:
    """Vectorize documents, keeping their label sets alongside."""
    out = []
    for doc in docs:
        v = vectorize(doc, vocab, mode, tokenizer)
        if normalized:
            v = normalize(v)
        out.append((v, doc.labels))
    return out


# ---------------------------------------------------------------------------
# Corpus file format: one document per line,
#   <id> TAB <comma-separated labels, possibly empty> TAB <escaped text>
# with tab, newline, carriage return and backslash escaped in the text field.

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def _escape_text(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _unescape_text(text: str, lineno: int) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _UNESCAPES:
                raise CorpusFormatError(f"line {lineno}: bad escape sequence in text")
            out.append(_UNESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def write_corpus(docs: Iterable[RawDocument], path: str | Path) -> None:
    """Write documents in the line-delimited corpus format."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            labels = ",".join(sorted(doc.labels))
            fh.write(f"{doc.doc_id}\t{labels}\t{_escape_text(doc.text)}\n")


def read_corpus(path: str | Path) -> list[RawDocument]:
    """Parse a corpus file; malformed lines raise with their line number."""
    docs: list[RawDocument] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise CorpusFormatError(
                    f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}"
                )
            doc_id, label_field, text = fields
            if doc_id in seen_ids:
                raise CorpusFormatError(f"line {lineno}: duplicate document id {doc_id!r}")
            seen_ids.add(doc_id)
            labels = frozenset(l for l in label_field.split(",") if l)
            docs.append(
                RawDocument(doc_id=doc_id, text=_unescape_text(text, lineno), labels=labels)
            )
    return docs


# ---------------------------------------------------------------------------
# Vocabulary file format:
#   winnowtc-vocab v1 min_freq=<k> avg_active=<d>
#   <token> TAB <feature-id> TAB <count>

_VOCAB_MAGIC = "winnowtc-vocab v1"


def _vocabulary_lines(vocab: Vocabulary) -> list[str]:
    lines = [f"{_VOCAB_MAGIC} min_freq={vocab.min_frequency} avg_active={vocab.avg_active!r}"]
    for tok, (fid, count) in sorted(vocab.entries.items(), key=lambda kv: kv[1][0]):
        lines.append(f"{tok}\t{fid}\t{count}")
    return lines


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(_vocabulary_lines(vocab)) + "\n")


def load_vocabulary(path: str | Path) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(_VOCAB_MAGIC):
        raise CorpusFormatError(f"{path}: not a winnowtc vocabulary file")
    header = dict(
        part.split("=", 1) for part in lines[0][len(_VOCAB_MAGIC):].split() if "=" in part
    )
    try:
        min_freq = int(header["min_freq"])
        avg_active = float(header["avg_active"])
    except (KeyError, ValueError) as exc:
        raise CorpusFormatError(f"{path}: bad vocabulary header") from exc
    entries: dict[str, tuple[int, int]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise CorpusFormatError(f"{path} line {lineno}: expected 3 fields")
        tok, fid, count = fields
        entries[tok] = (int(fid), int(count))
    return Vocabulary(entries=entries, min_frequency=min_freq, avg_active=avg_active)


def vocabulary_hash(vocab: Vocabulary) -> str:
    """Short content hash, embedded in model files to catch mismatches."""
    payload = "\n".join(_vocabulary_lines(vocab)).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:12]
