"""Document ingestion, chunking, edit tracking, and word-level accounting.

A corpus is an immutable value: applying edits returns a new corpus and
never mutates the input. All identifiers are deterministic content hashes
so repeated ingestion of the same sources yields identical ids.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import DataError
from .textutil import tokenize, word_count


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str


@dataclass(frozen=True)
class Chunk:
    id: str
    doc_id: str
    index: int
    text: str
    word_count: int


@dataclass(frozen=True)
class EditRecord:
    """One chunk rewrite: original and modified text plus word-level cost."""

    chunk_id: str
    original_text: str
    modified_text: str
    words_changed: int

    @classmethod
    def create(cls, chunk_id: str, original: str, modified: str) -> "EditRecord":
        return cls(chunk_id, original, modified, word_edit_count(original, modified))


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    chunks: tuple[Chunk, ...]
    chunk_size: int
    chunk_overlap: int

    def chunk_by_id(self, chunk_id: str) -> Chunk:
        for chunk in self.chunks:
            if chunk.id == chunk_id:
                return chunk
        raise DataError(f"unknown chunk id: {chunk_id}")

    def chunk_map(self) -> dict[str, Chunk]:
        return {chunk.id: chunk for chunk in self.chunks}

    def total_words(self) -> int:
        return sum(chunk.word_count for chunk in self.chunks)


def _doc_id(title: str, ordinal: int) -> str:
    digest = hashlib.sha256(f"{ordinal}\x1f{title}".encode("utf-8")).hexdigest()
    return digest[:12]


def chunk_document(doc: Document, chunk_size: int, chunk_overlap: int) -> list[Chunk]:
    """Sliding token window with stride chunk_size - chunk_overlap.

    The last chunk may be shorter; every token lands in at least one chunk.
    """
    if not 0 <= chunk_overlap < chunk_size:
        raise DataError(
            f"chunk_overlap must satisfy 0 <= overlap < size, got "
            f"overlap={chunk_overlap} size={chunk_size}"
        )
    tokens = tokenize(doc.text)
    stride = chunk_size - chunk_overlap
    chunks: list[Chunk] = []
    start = 0
    index = 0
    while True:
        window = tokens[start : start + chunk_size]
        text = " ".join(window)
        chunks.append(Chunk(f"{doc.id}-{index:03d}", doc.id, index, text, len(window)))
        if start + chunk_size >= len(tokens):
            break
        start += stride
        index += 1
    return chunks


def ingest(
    sources: list[tuple[str, str]],
    chunk_size: int = 600,
    chunk_overlap: int = 100,
) -> Corpus:
    """Build a corpus from (title, text) pairs with deterministic ids."""
    if not sources:
        raise DataError("no sources to ingest")
    documents: list[Document] = []
    chunks: list[Chunk] = []
    for ordinal, (title, text) in enumerate(sources):
        if not text or not text.strip():
            raise DataError(f"source {ordinal!r} ({title!r}) has empty text")
        doc = Document(_doc_id(title, ordinal), title, text)
        documents.append(doc)
        chunks.extend(chunk_document(doc, chunk_size, chunk_overlap))
    return Corpus(tuple(documents), tuple(chunks), chunk_size, chunk_overlap)


def word_edit_count(original: str, modified: str) -> int:
    """Word-level Levenshtein distance (insert/delete/substitute tokens)."""
    a = tokenize(original)
    b = tokenize(modified)
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, token_a in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, token_b in enumerate(b, start=1):
            cost = 0 if token_a == token_b else 1
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + cost,
            )
        previous = current
    return previous[-1]


def modification_ratio(modified_words: int, total_words: int) -> float:
    """Fraction of corpus words touched by an attack."""
    if total_words <= 0:
        raise DataError("total_words must be positive")
    return modified_words / total_words


def apply_edits(corpus: Corpus, edits: list[EditRecord]) -> Corpus:
    """Replace chunk texts per the edits; the input corpus is untouched.

    Rejects unknown chunk ids, duplicate edits for one chunk, and stale
    edits whose original_text no longer matches the corpus.
    """
    chunk_map = corpus.chunk_map()
    seen: set[str] = set()
    replacements: dict[str, str] = {}
    for edit in edits:
        if edit.chunk_id not in chunk_map:
            raise DataError(f"edit targets unknown chunk id: {edit.chunk_id}")
        if edit.chunk_id in seen:
            raise DataError(f"duplicate edit for chunk id: {edit.chunk_id}")
        seen.add(edit.chunk_id)
        if chunk_map[edit.chunk_id].text != edit.original_text:
            raise DataError(
                f"stale edit for chunk {edit.chunk_id}: corpus text changed "
                "since the edit was planned"
            )
        replacements[edit.chunk_id] = edit.modified_text
    new_chunks = tuple(
        replace(chunk, text=replacements[chunk.id], word_count=word_count(replacements[chunk.id]))
        if chunk.id in replacements
        else chunk
        for chunk in corpus.chunks
    )
    return Corpus(corpus.documents, new_chunks, corpus.chunk_size, corpus.chunk_overlap)


# --- serialization -----------------------------------------------------------

def _dump_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n"


def save_corpus(corpus: Corpus, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "documents.jsonl", "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(_dump_line({"id": doc.id, "title": doc.title, "text": doc.text}))
    with open(directory / "chunks.jsonl", "w", encoding="utf-8") as fh:
        for chunk in corpus.chunks:
            fh.write(
                _dump_line(
                    {
                        "id": chunk.id,
                        "doc_id": chunk.doc_id,
                        "index": chunk.index,
                        "text": chunk.text,
                        "word_count": chunk.word_count,
                    }
                )
            )
    with open(directory / "meta.json", "w", encoding="utf-8") as fh:
        fh.write(
            json.dumps(
                {"chunk_size": corpus.chunk_size, "chunk_overlap": corpus.chunk_overlap},
                sort_keys=True,
            )
            + "\n"
        )
    return directory


def load_corpus(directory: str | Path) -> Corpus:
    directory = Path(directory)
    try:
        meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
        documents = tuple(
            Document(rec["id"], rec["title"], rec["text"])
            for rec in _read_jsonl(directory / "documents.jsonl")
        )
        chunks = tuple(
            Chunk(rec["id"], rec["doc_id"], rec["index"], rec["text"], rec["word_count"])
            for rec in _read_jsonl(directory / "chunks.jsonl")
        )
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load corpus from {directory}: {exc}") from exc
    return Corpus(documents, chunks, meta["chunk_size"], meta["chunk_overlap"])


def save_edits(edits: list[EditRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for edit in edits:
            fh.write(
                _dump_line(
                    {
                        "chunk_id": edit.chunk_id,
                        "original_text": edit.original_text,
                        "modified_text": edit.modified_text,
                        "words_changed": edit.words_changed,
                    }
                )
            )
    return path


def load_edits(path: str | Path) -> list[EditRecord]:
    return [
        EditRecord(rec["chunk_id"], rec["original_text"], rec["modified_text"], rec["words_changed"])
        for rec in _read_jsonl(Path(path))
    ]


def _read_jsonl(path: Path):
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def load_sources(path: str | Path) -> list[tuple[str, str]]:
    """Read (title, text) sources from a directory of .txt files or a
    line-delimited records file with fields {title, text}."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.txt"))
        if not files:
            raise DataError(f"no .txt files under {path}")
        return [(f.stem, f.read_text(encoding="utf-8")) for f in files]
    if not path.exists():
        raise DataError(f"input path does not exist: {path}")
    sources = []
    for rec in _read_jsonl(path):
        try:
            sources.append((rec["title"], rec["text"]))
        except KeyError as exc:
            raise DataError(f"record missing field {exc} in {path}") from exc
    if not sources:
        raise DataError(f"no records in {path}")
    return sources
