"""Tokenization, vocabulary, sentence segmentation and answer normalization.

Everything downstream (chunking, BM25, the encoders, evaluation) shares the
same tokenizer so offsets and ids mean the same thing everywhere.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

PAD_ID = 0
UNK_ID = 1
CLS_ID = 2
SEP_ID = 3
NUM_RESERVED = 4

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_PUNCT = frozenset(string.punctuation)
_TERMINATORS = frozenset(".!?")


@dataclass(frozen=True)
class TokenSequence:
    """Token ids plus per-token (start, end) character offsets into the source."""

    ids: tuple[int, ...]
    offsets: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.ids)

    def surface(self, source: str, i: int) -> str:
        start, end = self.offsets[i]
        return source[start:end]


class Vocabulary:
    """Dense token-to-id map with four reserved ids (PAD, UNK, CLS, SEP).

    Immutable after construction; corpus tokens occupy ids 4..V-1.
    """

    def __init__(self, tokens: Iterable[str]):
        self._id_to_token = list(tokens)
        self._token_to_id = {
            tok: NUM_RESERVED + i for i, tok in enumerate(self._id_to_token)
        }
        if len(self._token_to_id) != len(self._id_to_token):
            raise ValueError("vocabulary tokens must be unique")

    @property
    def size(self) -> int:
        return NUM_RESERVED + len(self._id_to_token)

    def id_of(self, token: str) -> int:
        return self._token_to_id.get(token, UNK_ID)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def token_of(self, token_id: int) -> str:
        if token_id < NUM_RESERVED:
            return ("<pad>", "<unk>", "<cls>", "<sep>")[token_id]
        return self._id_to_token[token_id - NUM_RESERVED]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._id_to_token == other._id_to_token

    def save(self, path: str | Path) -> None:
        """One token per line; line number = id - 4 (reserved ids implicit)."""
        Path(path).write_text("\n".join(self._id_to_token) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        raw = Path(path).read_text(encoding="utf-8")
        return cls([line for line in raw.split("\n") if line])


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Lowercased surface tokens with their (start, end) offsets.

    Words are maximal \\w+ runs; every other non-space character is its own
    token. Offsets index the original string, so the original casing is
    recoverable by slicing.
    """
    return [(m.group().lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def tokenize(text: str, vocab: Vocabulary) -> TokenSequence:
    """Map text to vocabulary ids, keeping offsets for out-of-vocabulary tokens."""
    ids = []
    offsets = []
    for tok, start, end in token_spans(text):
        ids.append(vocab.id_of(tok))
        offsets.append((start, end))
    return TokenSequence(tuple(ids), tuple(offsets))


def split_sentences(text: str) -> list[tuple[int, int]]:
    """(start, end) ranges of sentences, trimmed to non-whitespace content.

    A boundary falls after '.', '!' or '?' when followed by whitespace and an
    uppercase letter. Text without a qualifying terminator is one sentence.
    Deliberately regex-grade: abbreviations like "Dr." do split.
    """
    n = len(text)
    bounds = []
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        j = i + 1
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k > j and k < n and text[k].isupper():
            bounds.append(j)

    ranges = []
    prev = 0
    for bound in bounds + [n]:
        start, end = prev, bound
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            ranges.append((start, end))
        prev = bound
    return ranges


def normalize_answer(answer: str) -> str:
    """Lowercase, drop punctuation, drop standalone articles, squeeze spaces."""
    s = answer.lower()
    s = "".join(ch for ch in s if ch not in _PUNCT)
    s = _ARTICLE_RE.sub(" ", s)
    return " ".join(s.split())


def build_vocabulary(texts: Iterable[str], max_size: int) -> Vocabulary:
    """Keep the most frequent tokens, ties broken lexicographically.

    Deterministic for a fixed corpus; max_size counts the four reserved ids.
    """
    if max_size < NUM_RESERVED:
        raise ValueError(
            f"max_size must be at least {NUM_RESERVED} (reserved ids), got {max_size}"
        )
    counts: Counter[str] = Counter()
    for text in texts:
        counts.update(tok for tok, _, _ in token_spans(text))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = [tok for tok, _ in ranked[: max_size - NUM_RESERVED]]
    return Vocabulary(keep)
