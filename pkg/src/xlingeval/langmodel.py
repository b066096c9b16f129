"""N-gram fluency model and the external-score loading channel.

Conditional token distributions normalize over vocabulary + UNK; end of
sentence is a separate binary stop model so that the token distributions
stay normalized. Sentence scores are mean per-token natural-log
probabilities including the final stop transition (higher = more fluent).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

from .corpusio import TokenizedSentence
from .errors import ArgumentError, FormatError

import math

UNK = "<unk>"
BOS = "<s>"

WITTEN_BELL = "witten-bell"
ADD_K = "add-k"

LM_MAGIC = b"USLM"
LM_VERSION = 1


@dataclass
class NGramModel:
    order: int = 3
    smoothing: str = WITTEN_BELL
    k: float = 1.0  # only used by add-k
    vocabulary: set = field(default_factory=set)
    # token_counts[L][ctx][word] and stop_counts[L][ctx] for context length L
    token_counts: list = field(default_factory=list)
    stop_counts: list = field(default_factory=list)

    def __post_init__(self):
        if self.order < 1:
            raise ArgumentError("order must be >= 1")
        if self.smoothing not in (WITTEN_BELL, ADD_K):
            raise ArgumentError(f"unknown smoothing {self.smoothing!r}")

    # -- probabilities ---------------------------------------------------

    @property
    def _vocab_size(self) -> int:
        return len(self.vocabulary) + 1  # + UNK

    def _map(self, token: str) -> str:
        return token if token in self.vocabulary else UNK

    def token_prob(self, word: str, context: tuple[str, ...]) -> float:
        """P(word | context) over vocabulary + UNK; context is BOS-padded."""
        word = self._map(word)
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        if self.smoothing == ADD_K:
            return self._addk_prob(word, context)
        return self._wb_prob(word, context)

    def _addk_prob(self, word, context) -> float:
        while True:
            table = self.token_counts[len(context)].get(context)
            total = sum(table.values()) if table else 0
            denom = total + self.k * self._vocab_size
            if denom > 0:
                count = table.get(word, 0) if table else 0
                return (count + self.k) / denom
            if not context:
                return 1.0 / self._vocab_size  # k = 0 and empty corpus context
            context = context[1:]

    def _wb_prob(self, word, context) -> float:
        if context:
            lower = self._wb_prob(word, context[1:])
        else:
            lower = 1.0 / self._vocab_size
        table = self.token_counts[len(context)].get(context)
        if not table:
            return lower
        total = sum(table.values())
        types = len(table)
        return (table.get(word, 0) + types * lower) / (total + types)

    def stop_prob(self, context: tuple[str, ...]) -> float:
        """P(end of sentence | context), a smoothed binary model."""
        context = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        if self.smoothing == ADD_K:
            while True:
                stops = self.stop_counts[len(context)].get(context, 0)
                table = self.token_counts[len(context)].get(context)
                conts = sum(table.values()) if table else 0
                denom = stops + conts + 2 * self.k
                if denom > 0:
                    return (stops + self.k) / denom
                if not context:
                    return 0.5
                context = context[1:]
        return self._wb_stop(context)

    def _wb_stop(self, context) -> float:
        lower = self._wb_stop(context[1:]) if context else 0.5
        stops = self.stop_counts[len(context)].get(context, 0)
        table = self.token_counts[len(context)].get(context)
        conts = sum(table.values()) if table else 0
        total = stops + conts
        if total == 0:
            return lower
        types = (1 if stops else 0) + (1 if conts else 0)
        return (stops + types * lower) / (total + types)


def train_ngram(corpus: list[TokenizedSentence], order: int = 3,
                smoothing: str = WITTEN_BELL, k: float = 1.0,
                vocabulary: set | None = None) -> NGramModel:
    """Count BOS-padded n-grams and sentence-final stops; no pruning."""
    if not corpus:
        raise ArgumentError("empty training corpus")
    if vocabulary is None:
        vocabulary = {tok for sent in corpus for tok in sent.tokens}
    model = NGramModel(order=order, smoothing=smoothing, k=k,
                       vocabulary=set(vocabulary))
    model.token_counts = [dict() for _ in range(order)]
    model.stop_counts = [dict() for _ in range(order)]
    for sent in corpus:
        tokens = [model._map(t) for t in sent.tokens]
        padded = [BOS] * (order - 1) + tokens
        for pos, word in enumerate(tokens):
            full_ctx = tuple(padded[pos:pos + order - 1])
            for L in range(order):
                if L > len(full_ctx):
                    break
                ctx = full_ctx[len(full_ctx) - L:]
                table = model.token_counts[L].setdefault(ctx, {})
                table[word] = table.get(word, 0) + 1
        full_ctx = tuple(padded[len(tokens):len(tokens) + order - 1])
        for L in range(order):
            if L > len(full_ctx):
                break
            ctx = full_ctx[len(full_ctx) - L:]
            model.stop_counts[L][ctx] = model.stop_counts[L].get(ctx, 0) + 1
    return model


def lm_score(model: NGramModel, sentence: TokenizedSentence) -> float:
    """Mean per-token log probability including the stop transition."""
    if not sentence.tokens:
        raise ArgumentError("cannot score an empty sentence")
    tokens = [model._map(t) for t in sentence.tokens]
    padded = [BOS] * (model.order - 1) + tokens
    total = 0.0
    for pos, word in enumerate(tokens):
        ctx = tuple(padded[pos:pos + model.order - 1])
        p = model.token_prob(word, ctx)
        total += math.log(p) if p > 0 else -math.inf
    ctx = tuple(padded[len(tokens):len(tokens) + model.order - 1])
    p_stop = model.stop_prob(ctx)
    total += math.log(p_stop) if p_stop > 0 else -math.inf
    return total / (len(tokens) + 1)


# -- persistence ---------------------------------------------------------

def save_ngram_model(model: NGramModel, path) -> None:
    def wstr(fh, s: str):
        b = s.encode("utf-8")
        fh.write(struct.pack("<I", len(b)))
        fh.write(b)

    with open(path, "wb") as fh:
        fh.write(LM_MAGIC)
        fh.write(struct.pack("<HIBd", LM_VERSION, model.order,
                             0 if model.smoothing == WITTEN_BELL else 1, model.k))
        vocab = sorted(model.vocabulary)
        fh.write(struct.pack("<Q", len(vocab)))
        for tok in vocab:
            wstr(fh, tok)
        for L in range(model.order):
            tables = model.token_counts[L]
            fh.write(struct.pack("<Q", len(tables)))
            for ctx, table in tables.items():
                fh.write(struct.pack("<I", len(ctx)))
                for tok in ctx:
                    wstr(fh, tok)
                fh.write(struct.pack("<Q", len(table)))
                for word, count in table.items():
                    wstr(fh, word)
                    fh.write(struct.pack("<q", count))
            stops = model.stop_counts[L]
            fh.write(struct.pack("<Q", len(stops)))
            for ctx, count in stops.items():
                fh.write(struct.pack("<I", len(ctx)))
                for tok in ctx:
                    wstr(fh, tok)
                fh.write(struct.pack("<q", count))


def load_ngram_model(path) -> NGramModel:
    def rstr(fh) -> str:
        (n,) = struct.unpack("<I", fh.read(4))
        return fh.read(n).decode("utf-8")

    with open(path, "rb") as fh:
        if fh.read(4) != LM_MAGIC:
            raise FormatError(f"{path}: not a language model file")
        version, order, smooth_tag, k = struct.unpack("<HIBd", fh.read(15))
        if version != LM_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        (nvocab,) = struct.unpack("<Q", fh.read(8))
        vocab = {rstr(fh) for _ in range(nvocab)}
        model = NGramModel(order=order,
                           smoothing=WITTEN_BELL if smooth_tag == 0 else ADD_K,
                           k=k, vocabulary=vocab)
        model.token_counts = []
        model.stop_counts = []
        for _ in range(order):
            (ntables,) = struct.unpack("<Q", fh.read(8))
            tables = {}
            for _ in range(ntables):
                (clen,) = struct.unpack("<I", fh.read(4))
                ctx = tuple(rstr(fh) for _ in range(clen))
                (nevents,) = struct.unpack("<Q", fh.read(8))
                table = {}
                for _ in range(nevents):
                    word = rstr(fh)
                    (count,) = struct.unpack("<q", fh.read(8))
                    table[word] = count
                tables[ctx] = table
            model.token_counts.append(tables)
            (nstops,) = struct.unpack("<Q", fh.read(8))
            stops = {}
            for _ in range(nstops):
                (clen,) = struct.unpack("<I", fh.read(4))
                ctx = tuple(rstr(fh) for _ in range(clen))
                (count,) = struct.unpack("<q", fh.read(8))
                stops[ctx] = count
            model.stop_counts.append(stops)
        return model


def load_external_scores(path) -> dict[int, float]:
    """TSV of (index, score) aligned with a hypothesis file; must be gapless."""
    path = Path(path)
    scores: dict[int, float] = {}
    with open(path, encoding="utf-8") as fh:
        for rowno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise FormatError(f"{path}: row {rowno} needs 2 columns")
            try:
                idx, val = int(cols[0]), float(cols[1])
            except ValueError as exc:
                raise FormatError(f"{path}: row {rowno} is not (int, float)") from exc
            if idx in scores:
                raise FormatError(f"{path}: duplicate index {idx}")
            scores[idx] = val
    for i in range(len(scores)):
        if i not in scores:
            raise FormatError(f"{path}: missing index {i}")
    return scores
