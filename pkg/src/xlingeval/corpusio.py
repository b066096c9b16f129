"""Corpus, embedding-store, and evaluation-dataset I/O.

All binary formats are little-endian; vectors are IEEE-754 binary32.
Stores are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import logging
import struct
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import ArgumentError, FormatError, LookupError_

log = logging.getLogger(__name__)

MAGIC = b"USEB"
FORMAT_VERSION = 1

STORE_KINDS = {
    "static-word": 0,
    "contextual-token": 1,
    "sentence": 2,
    "orthogonal-map": 3,
    "bias-vector": 4,
    "projection": 5,
}
KIND_CODES = {v: k for k, v in STORE_KINDS.items()}

# Keys are word strings (static-word), (sentence, token) index pairs
# (contextual-token), or sentence indices (sentence kind).
StoreKey = Union[str, int, tuple[int, int]]


def tokenize(text: str) -> "TokenizedSentence":
    """Whitespace tokenization after NFC normalization, punctuation detached."""
    normalized = unicodedata.normalize("NFC", text)
    chars = []
    for ch in normalized:
        if unicodedata.category(ch).startswith("P"):
            chars.append(f" {ch} ")
        else:
            chars.append(ch)
    tokens = "".join(chars).split()
    return TokenizedSentence(text=normalized, tokens=tuple(tokens))


@dataclass(frozen=True)
class TokenizedSentence:
    text: str
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class ScoredPair:
    """A (source, target, score) triple flowing through mining and evaluation."""

    source: TokenizedSentence
    target: TokenizedSentence
    score: float

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ArgumentError(f"non-finite pair score: {self.score}")


@dataclass(frozen=True)
class EvalRecord:
    source: str
    hypothesis: str
    human_score: float
    reference: str | None = None

    def __post_init__(self):
        if not np.isfinite(self.human_score):
            raise ArgumentError(f"non-finite human score: {self.human_score}")


@dataclass
class EmbeddingStore:
    """Keyed vectors of one fixed dimension.

    Entries map word strings, (sentence, token) pairs, or sentence indices
    to vectors, depending on `kind`. Vectors are float32 except for
    double-precision pipeline outputs, which stay float64 in memory; the
    binary file format is always float32.
    """

    dimension: int
    kind: str
    entries: dict[StoreKey, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in STORE_KINDS:
            raise ArgumentError(f"unknown store kind: {self.kind!r}")
        if self.dimension <= 0:
            raise ArgumentError(f"non-positive dimension: {self.dimension}")
        fixed = {}
        for key, vec in self.entries.items():
            arr = np.asarray(vec)
            if arr.dtype != np.float64:  # keep double-precision pipelines exact
                arr = arr.astype(np.float32)
            if arr.shape != (self.dimension,):
                raise FormatError(
                    f"vector for key {key!r} has shape {arr.shape}, "
                    f"expected ({self.dimension},)"
                )
            if not np.all(np.isfinite(arr)):
                raise FormatError(f"non-finite components in vector for key {key!r}")
            fixed[key] = arr
        self.entries = fixed

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: StoreKey) -> bool:
        return key in self.entries

    def vector(self, key: StoreKey) -> np.ndarray:
        try:
            return self.entries[key]
        except KeyError:
            raise LookupError_(f"no embedding for key {key!r}") from None

    def token_matrix(
        self, sentence: TokenizedSentence, sent_index: int | None = None
    ) -> np.ndarray:
        """Stack token vectors for one sentence, shape (len(sentence), dim)."""
        rows = []
        for t, token in enumerate(sentence.tokens):
            if self.kind == "contextual-token":
                if sent_index is None:
                    raise ArgumentError("contextual-token store needs sent_index")
                key: StoreKey = (sent_index, t)
            else:
                key = token
            if key not in self.entries:
                raise LookupError_(
                    f"missing embedding for token {token!r} "
                    f"(position {t}) in sentence {sentence.text!r}"
                )
            rows.append(self.entries[key])
        if not rows:
            raise ArgumentError(f"empty sentence: {sentence.text!r}")
        return np.stack(rows)


def _key_to_str(key: StoreKey) -> str:
    if isinstance(key, tuple):
        return f"{key[0]}:{key[1]}"
    return str(key)


def _str_to_key(s: str, kind: str) -> StoreKey:
    if kind == "contextual-token":
        a, b = s.split(":")
        return (int(a), int(b))
    if kind == "sentence":
        return int(s)
    return s


def load_corpus(path: str | Path, tokenizer=tokenize) -> list[TokenizedSentence]:
    """One sentence per line, UTF-8; empty lines are dropped, order preserved."""
    path = Path(path)
    sentences = []
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise FormatError(f"{path}: line {lineno} is not valid UTF-8") from exc
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            sentences.append(tokenizer(line))
    log.info("loaded %d sentences from %s", len(sentences), path)
    return sentences


def save_corpus(sentences: Iterable[TokenizedSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            fh.write(sent.text + "\n")


def save_embedding_store_binary(store: EmbeddingStore, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HBIQ", FORMAT_VERSION, STORE_KINDS[store.kind],
                             store.dimension, len(store.entries)))
        for key, vec in store.entries.items():
            kb = _key_to_str(key).encode("utf-8")
            fh.write(struct.pack("<I", len(kb)))
            fh.write(kb)
            fh.write(vec.astype("<f4", copy=False).tobytes())


def load_embedding_store(path: str | Path) -> EmbeddingStore:
    """Load a store in binary (USEB) or text format, autodetected by magic."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return _load_store_binary(path)
    return _load_store_text(path)


def _load_store_binary(path: Path) -> EmbeddingStore:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        version, kind_code, dim, count = struct.unpack("<HBIQ", fh.read(15))
        if version != FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        if kind_code not in KIND_CODES:
            raise FormatError(f"{path}: unknown kind code {kind_code}")
        kind = KIND_CODES[kind_code]
        entries: dict[StoreKey, np.ndarray] = {}
        for _ in range(count):
            (klen,) = struct.unpack("<I", fh.read(4))
            key = _str_to_key(fh.read(klen).decode("utf-8"), kind)
            buf = fh.read(4 * dim)
            if len(buf) != 4 * dim:
                raise FormatError(f"{path}: truncated vector for key {key!r}")
            entries[key] = np.frombuffer(buf, dtype="<f4").copy()
        return EmbeddingStore(dimension=dim, kind=kind, entries=entries)


def _load_store_text(path: Path) -> EmbeddingStore:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FormatError(f"{path}: expected '<count> <dim>' header")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise FormatError(f"{path}: non-integer header fields") from exc
        entries: dict[StoreKey, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise FormatError(
                    f"{path}: line {lineno} has {len(parts) - 1} components, "
                    f"expected {dim}"
                )
            entries[parts[0]] = np.array(parts[1:], dtype=np.float32)
    if len(entries) != count:
        raise FormatError(f"{path}: header promises {count} entries, found {len(entries)}")
    return EmbeddingStore(dimension=dim, kind="static-word", entries=entries)


def save_embedding_store_text(store: EmbeddingStore, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store.entries)} {store.dimension}\n")
        for key, vec in store.entries.items():
            comps = " ".join(repr(float(v)) for v in vec)
            fh.write(f"{_key_to_str(key)} {comps}\n")


def _looks_numeric(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_eval_dataset(path: str | Path) -> list[EvalRecord]:
    """TSV of (source, hypothesis, human_score[, reference]); header auto-detected."""
    path = Path(path)
    records = []
    with open(path, encoding="utf-8") as fh:
        for rowno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) < 3:
                raise FormatError(f"{path}: row {rowno} has {len(cols)} columns, need 3")
            if rowno == 1 and not _looks_numeric(cols[2]):
                continue  # header row
            try:
                score = float(cols[2])
            except ValueError as exc:
                raise FormatError(
                    f"{path}: row {rowno} has non-numeric score {cols[2]!r}"
                ) from exc
            records.append(
                EvalRecord(
                    source=cols[0],
                    hypothesis=cols[1],
                    human_score=score,
                    reference=cols[3] if len(cols) > 3 else None,
                )
            )
    return records


def save_scored_pairs(pairs: Iterable[ScoredPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            fh.write(f"{p.source.text}\t{p.target.text}\t{p.score!r}\n")


def load_scored_pairs(path: str | Path, tokenizer=tokenize) -> list[ScoredPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for rowno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise FormatError(f"{path}: row {rowno} has {len(cols)} columns, need 3")
            pairs.append(
                ScoredPair(tokenizer(cols[0]), tokenizer(cols[1]), float(cols[2]))
            )
    return pairs
