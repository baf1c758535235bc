"""Document ingestion and greedy sentence-preserving chunking into evidence blocks.

A block holds whole sentences from one document, repeats the document title,
and never exceeds the token budget once framed as [CLS] title [SEP] body [SEP].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .text import CLS_ID, SEP_ID, TokenSequence, Vocabulary, split_sentences, tokenize

DEFAULT_MAX_BLOCK_LEN = 288
STRUCTURAL_TOKENS = 3  # [CLS] ... [SEP] ... [SEP]


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    body: str


@dataclass(frozen=True)
class EvidenceBlock:
    b: int
    doc_id: str
    title: str
    source_text: str
    title_tokens: TokenSequence  # offsets into title
    sentences: tuple[TokenSequence, ...]  # offsets into source_text
    body_tokens: TokenSequence  # concatenation of sentences, offsets into source_text

    def body_len(self) -> int:
        return len(self.body_tokens)


@dataclass(frozen=True)
class Corpus:
    blocks: tuple[EvidenceBlock, ...]
    vocab: Vocabulary
    max_block_len: int

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)


def _shift(seq: TokenSequence, delta: int) -> TokenSequence:
    return TokenSequence(seq.ids, tuple((s + delta, e + delta) for s, e in seq.offsets))


def _concat(seqs: list[TokenSequence]) -> TokenSequence:
    ids: tuple[int, ...] = ()
    offsets: tuple[tuple[int, int], ...] = ()
    for seq in seqs:
        ids += seq.ids
        offsets += seq.offsets
    return TokenSequence(ids, offsets)


def _make_block(
    doc: Document,
    vocab: Vocabulary,
    title_tokens: TokenSequence,
    sentence_ranges: list[tuple[int, int]],
    char_end: int,
) -> EvidenceBlock:
    char_start = sentence_ranges[0][0]
    source_text = doc.body[char_start:char_end]
    sentences = []
    for s, e in sentence_ranges:
        seq = tokenize(doc.body[s : min(e, char_end)], vocab)
        sentences.append(_shift(seq, s - char_start))
    return EvidenceBlock(
        b=-1,
        doc_id=doc.doc_id,
        title=doc.title,
        source_text=source_text,
        title_tokens=title_tokens,
        sentences=tuple(sentences),
        body_tokens=_concat(sentences),
    )


def chunk_document(
    doc: Document, vocab: Vocabulary, max_block_len: int = DEFAULT_MAX_BLOCK_LEN
) -> list[EvidenceBlock]:
    """Greedily pack whole sentences into blocks of at most max_block_len tokens.

    The budget counts title tokens plus the three structural tokens. A single
    sentence longer than the budget is hard-truncated and emitted alone.
    """
    title_tokens = tokenize(doc.title, vocab)
    budget = max_block_len - STRUCTURAL_TOKENS - len(title_tokens)
    if budget < 1:
        raise ValueError(
            f"max_block_len={max_block_len} leaves no room for body tokens after "
            f"title of {len(title_tokens)} tokens in document {doc.doc_id!r}"
        )

    ranges = split_sentences(doc.body)
    sentence_seqs = [tokenize(doc.body[s:e], vocab) for s, e in ranges]

    blocks: list[EvidenceBlock] = []
    current: list[tuple[int, int]] = []
    current_len = 0

    def flush(char_end: int) -> None:
        nonlocal current, current_len
        if current:
            blocks.append(_make_block(doc, vocab, title_tokens, current, char_end))
            current = []
            current_len = 0

    for (start, end), seq in zip(ranges, sentence_seqs):
        n = len(seq)
        if n > budget:
            flush(current_end(ranges, current))
            # oversize sentence: keep the first `budget` tokens
            cut = start + seq.offsets[budget - 1][1]
            blocks.append(_make_block(doc, vocab, title_tokens, [(start, end)], cut))
            continue
        if current_len + n > budget:
            flush(current_end(ranges, current))
        current.append((start, end))
        current_len += n
    flush(current_end(ranges, current))

    return blocks


def current_end(ranges: list[tuple[int, int]], current: list[tuple[int, int]]) -> int:
    return current[-1][1] if current else 0


def build_corpus(
    docs: list[Document],
    vocab: Vocabulary,
    max_block_len: int = DEFAULT_MAX_BLOCK_LEN,
) -> Corpus:
    """Chunk documents in order and assign dense block indices 0..B-1."""
    seen: set[str] = set()
    for doc in docs:
        if doc.doc_id in seen:
            raise ValueError(f"duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)

    blocks: list[EvidenceBlock] = []
    for doc in docs:
        for block in chunk_document(doc, vocab, max_block_len):
            blocks.append(
                EvidenceBlock(
                    b=len(blocks),
                    doc_id=block.doc_id,
                    title=block.title,
                    source_text=block.source_text,
                    title_tokens=block.title_tokens,
                    sentences=block.sentences,
                    body_tokens=block.body_tokens,
                )
            )
    return Corpus(blocks=tuple(blocks), vocab=vocab, max_block_len=max_block_len)


def block_full_tokens(block: EvidenceBlock) -> list[int]:
    """Encoder input framing: [CLS] + title + [SEP] + body + [SEP]."""
    return (
        [CLS_ID]
        + list(block.title_tokens.ids)
        + [SEP_ID]
        + list(block.body_tokens.ids)
        + [SEP_ID]
    )


def load_documents(path: str | Path) -> list[Document]:
    """Read a JSON-lines corpus: {"id": ..., "title": ..., "text": ...} per line."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                docs.append(
                    Document(doc_id=str(obj["id"]), title=obj["title"], body=obj["text"])
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"line {lineno}: malformed corpus record: {exc}") from exc
    return docs


def save_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    """Write blocks.jsonl ({"b","doc_id","title","text"}) and vocab.txt."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "blocks.jsonl", "w", encoding="utf-8") as fh:
        for block in corpus.blocks:
            fh.write(
                json.dumps(
                    {
                        "b": block.b,
                        "doc_id": block.doc_id,
                        "title": block.title,
                        "text": block.source_text,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    corpus.vocab.save(out / "vocab.txt")
    (out / "corpus.json").write_text(
        json.dumps({"max_block_len": corpus.max_block_len, "blocks": corpus.num_blocks})
        + "\n"
    )


def load_corpus(corpus_dir: str | Path) -> Corpus:
    """Rebuild a corpus from blocks.jsonl + vocab.txt (tokenization is pure)."""
    root = Path(corpus_dir)
    vocab = Vocabulary.load(root / "vocab.txt")
    meta = json.loads((root / "corpus.json").read_text())
    blocks: list[EvidenceBlock] = []
    with open(root / "blocks.jsonl", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: malformed block record: {exc}") from exc
            text = obj["text"]
            sentences = tuple(
                tokenize(text[s:e], vocab) and _shift(tokenize(text[s:e], vocab), s)
                for s, e in split_sentences(text)
            )
            blocks.append(
                EvidenceBlock(
                    b=int(obj["b"]),
                    doc_id=obj["doc_id"],
                    title=obj["title"],
                    source_text=text,
                    title_tokens=tokenize(obj["title"], vocab),
                    sentences=sentences,
                    body_tokens=_concat(list(sentences)),
                )
            )
    if [b.b for b in blocks] != list(range(len(blocks))):
        raise ValueError("block indices are not dense 0..B-1")
    return Corpus(blocks=tuple(blocks), vocab=vocab, max_block_len=meta["max_block_len"])
