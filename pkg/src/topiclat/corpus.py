"""Document ingest, text normalization, and overlapping fixed-size chunking.

Chunk windows are computed on the *filtered* token stream (post lowercasing
and stopword removal), so every downstream model sees the same tokens the
windows were measured on.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import ConfigError, DuplicateId, EmptyDocument, ParseError

# Maximal word-character runs, with interior "." or "," kept inside
# alphanumeric runs so citation numbers like "19.640" survive as one token.
_TOKEN_RE = re.compile(r"\w+(?:[.,]\w+)*", re.UNICODE)
_LETTER_RE = re.compile(r"[^\W\d_]", re.UNICODE)

_BUILTIN_STOPWORDS = {"spanish": "stopwords_spanish.txt"}


@lru_cache(maxsize=16)
def load_stopwords(setting: str | None) -> frozenset[str]:
    """Resolve a stopword setting: "none", a builtin name, or a file path.

    Files hold one token per line; blank lines and lines starting with "#"
    are ignored.
    """
    if setting is None or setting == "none":
        return frozenset()
    if setting in _BUILTIN_STOPWORDS:
        text = (
            resources.files("topiclat.data")
            .joinpath(_BUILTIN_STOPWORDS[setting])
            .read_text(encoding="utf-8")
        )
    else:
        path = Path(setting)
        if not path.exists():
            raise ConfigError(
                f"stopword_list {setting!r} is neither a builtin "
                f"({sorted(_BUILTIN_STOPWORDS)} or 'none') nor an existing file"
            )
        text = path.read_text(encoding="utf-8")
    words = (line.strip() for line in text.splitlines())
    return frozenset(w for w in words if w and not w.startswith("#"))


@dataclass(frozen=True)
class PipelineConfig:
    """Tokenization and chunking parameters."""

    chunk_size: int = 500
    overlap: int = 50
    stopword_list: str = "spanish"
    lowercase: bool = True
    keep_numbers: bool = True

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ConfigError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if not 0 <= self.overlap < self.chunk_size:
            raise ConfigError(
                f"overlap must satisfy 0 <= overlap < chunk_size, "
                f"got overlap={self.overlap}, chunk_size={self.chunk_size}"
            )

    def stopwords(self) -> frozenset[str]:
        return load_stopwords(self.stopword_list)


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Chunk:
    """A contiguous token window of one document; the unit of indexing."""

    chunk_id: str
    doc_id: str
    tokens: tuple[str, ...]
    token_span: tuple[int, int]  # [start, end) in the document token stream


def tokenize(
    text: str,
    config: PipelineConfig,
    stopwords: frozenset[str] | None = None,
) -> list[str]:
    """Split text into filtered tokens.

    Order of operations: segment into word runs, lowercase (if configured),
    drop stopwords, drop numeric tokens when keep_numbers is off. Punctuation
    never survives segmentation except "."/"," interior to a run.

    `stopwords` lets callers resolve the list once per corpus instead of per
    document.
    """
    if stopwords is None:
        stopwords = config.stopwords()
    out = []
    for match in _TOKEN_RE.finditer(text):
        token = match.group()
        if config.lowercase:
            token = token.lower()
        if token in stopwords:
            continue
        if not config.keep_numbers and not _LETTER_RE.search(token):
            continue
        out.append(token)
    return out


def chunk_document(doc: Document, config: PipelineConfig,
                   stopwords: frozenset[str] | None = None) -> list[Chunk]:
    """Cut a document's filtered token stream into overlapping windows.

    Window i covers [i*stride, i*stride + chunk_size) with
    stride = chunk_size - overlap; the final window is truncated at the
    stream end. Chunk ids are doc_id + "#" + ordinal.
    """
    tokens = tokenize(doc.text, config, stopwords)
    if not tokens:
        raise EmptyDocument(doc.doc_id)
    stride = config.chunk_size - config.overlap
    chunks = []
    i = 0
    while True:
        start = i * stride
        end = min(start + config.chunk_size, len(tokens))
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}#{i}",
                doc_id=doc.doc_id,
                tokens=tuple(tokens[start:end]),
                token_span=(start, end),
            )
        )
        if end == len(tokens):
            return chunks
        i += 1


def ingest_jsonl(
    path: str | Path, config: PipelineConfig
) -> tuple[list[Document], list[Chunk]]:
    """Parse a JSONL corpus ({"id", "text", "meta"?} per line) and chunk it.

    Documents are validated line by line, then sorted by doc_id so the chunk
    order does not depend on file order. Duplicate ids and unparseable lines
    are reported with their line numbers.
    """
    stopwords = config.stopwords()
    docs: dict[str, Document] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise ParseError(line_no, "expected a JSON object")
            if "id" not in record:
                raise ParseError(line_no, "missing required field 'id'")
            if "text" not in record:
                raise ParseError(line_no, "missing required field 'text'")
            doc_id = record["id"]
            if not isinstance(doc_id, str) or not doc_id:
                raise ParseError(line_no, "'id' must be a non-empty string")
            if not isinstance(record["text"], str):
                raise ParseError(line_no, "'text' must be a string")
            if doc_id in docs:
                raise DuplicateId(doc_id, line_no)
            meta = record.get("meta", {})
            if not isinstance(meta, dict):
                raise ParseError(line_no, "'meta' must be an object")
            docs[doc_id] = Document(
                doc_id=doc_id,
                text=record["text"],
                metadata={str(k): str(v) for k, v in meta.items()},
            )
    documents = sorted(docs.values(), key=lambda d: d.doc_id)
    chunks: list[Chunk] = []
    for doc in documents:
        chunks.extend(chunk_document(doc, config, stopwords))
    return documents, chunks


def dump_chunks_jsonl(chunks: list[Chunk], path: str | Path) -> None:
    """Write the chunk dump consumed by offline embedding tools."""
    with open(path, "w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(
                json.dumps(
                    {
                        "chunk_id": chunk.chunk_id,
                        "doc_id": chunk.doc_id,
                        "span": list(chunk.token_span),
                        "tokens": list(chunk.tokens),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
