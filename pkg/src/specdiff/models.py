"""Smoothed fixed-order context models used as the target and the AR drafter."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SeededRng, Vocab, sample, temperature_scale

FORMAT_VERSION = 1


class CorpusTooShort(ValueError):
    pass


class MaskInDraft(ValueError):
    pass


class CheckpointError(ValueError):
    pass


@dataclass
class ContextModel:
    """Add-lambda smoothed order-k model.

    P(v | ctx) = (count(ctx, v) + lambda) / (count(ctx) + lambda * |E|) for
    every emittable token v; BOS and MASK get zero mass. Contexts shorter than
    k are left-padded with BOS.
    """

    order: int
    smoothing_lambda: float
    vocab: Vocab
    counts: dict[tuple[int, ...], dict[int, int]]
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self._support = self.vocab.emittable
        self._n_support = int(self._support.sum())
        uniform = self._support / self._n_support
        uniform.flags.writeable = False
        self._uniform = uniform

    def context(self, prefix) -> tuple[int, ...]:
        if self.order == 0:
            return ()
        tail = tuple(prefix[-self.order:])
        if len(tail) < self.order:
            tail = (self.vocab.bos_id,) * (self.order - len(tail)) + tail
        return tail

    def distribution_for(self, ctx: tuple[int, ...]) -> np.ndarray:
        dist = self._cache.get(ctx)
        if dist is not None:
            return dist
        row = self.counts.get(ctx)
        if row is None:
            dist = self._uniform
        else:
            lam = self.smoothing_lambda
            total = sum(row.values())
            dist = np.where(self._support, lam, 0.0)
            for tok, c in row.items():
                dist[tok] += c
            dist /= total + lam * self._n_support
            dist.flags.writeable = False
        self._cache[ctx] = dist
        return dist

    def n_parameters(self) -> int:
        return sum(len(row) for row in self.counts.values())

    # checkpoint I/O

    def save(self, path) -> None:
        lines = [
            f"format_version={FORMAT_VERSION}",
            "kind=context_model",
            f"order={self.order}",
            f"lambda={self.smoothing_lambda!r}",
            f"vocab_mode={self.vocab.mode}",
            "vocab=" + json.dumps(list(self.vocab.symbols), ensure_ascii=True),
            f"contexts={len(self.counts)}",
        ]
        for ctx in sorted(self.counts):
            row = self.counts[ctx]
            entries = " ".join(f"{tok}:{row[tok]}" for tok in sorted(row))
            lines.append(f"{' '.join(map(str, ctx))}\t{entries}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> "ContextModel":
        text = Path(path).read_text(encoding="ascii").splitlines()
        header, body = _read_header(text, "context_model")
        vocab = Vocab(tuple(json.loads(header["vocab"])), header["vocab_mode"])
        counts: dict[tuple[int, ...], dict[int, int]] = {}
        for line in body[: int(header["contexts"])]:
            ctx_part, entries = line.split("\t")
            ctx = tuple(int(t) for t in ctx_part.split()) if ctx_part else ()
            row = {}
            for item in entries.split():
                tok, c = item.split(":")
                row[int(tok)] = int(c)
            counts[ctx] = row
        return cls(int(header["order"]), float(header["lambda"]), vocab, counts)


def _read_header(lines, kind):
    header = {}
    i = 0
    while i < len(lines) and "=" in lines[i] and "\t" not in lines[i]:
        key, value = lines[i].split("=", 1)
        header[key] = value
        i += 1
        if key == "contexts" or key == "end_header":
            break
    if header.get("format_version") != str(FORMAT_VERSION):
        raise CheckpointError(f"unsupported checkpoint format {header.get('format_version')!r}")
    if header.get("kind") != kind:
        raise CheckpointError(f"expected a {kind} checkpoint, found {header.get('kind')!r}")
    return header, lines[i:]


def train_context_model(corpus, order: int, smoothing_lambda: float, vocab: Vocab) -> ContextModel:
    corpus = list(corpus)
    if order < 0:
        raise ValueError("order must be non-negative")
    if not smoothing_lambda > 0:
        raise ValueError("smoothing lambda must be positive")
    if len(corpus) <= order:
        raise CorpusTooShort(f"corpus of {len(corpus)} tokens is too short for order {order}")
    if any(t in (vocab.mask_id, vocab.bos_id) for t in corpus):
        raise ValueError("training corpus may not contain BOS or MASK")
    padded = [vocab.bos_id] * order + corpus
    grams = Counter(tuple(padded[i : i + order + 1]) for i in range(len(corpus)))
    counts: dict[tuple[int, ...], dict[int, int]] = defaultdict(dict)
    for gram, c in grams.items():
        counts[gram[:-1]][gram[-1]] = c
    return ContextModel(order, float(smoothing_lambda), vocab, dict(counts))


def next_distribution(model: ContextModel, prefix) -> np.ndarray:
    return model.distribution_for(model.context(prefix))


def parallel_score(model: ContextModel, prefix, draft) -> list[np.ndarray]:
    """Teacher-forced distributions p_1 .. p_{gamma+1} for one drafted block.

    Element j conditions on ``prefix + draft[:j]``. Counted as a single target
    call by the decoding engine.
    """
    mask_id = model.vocab.mask_id
    if any(t == mask_id for t in draft):
        raise MaskInDraft("draft contains MASK tokens")
    k = model.order
    seq = list(prefix[-k:]) if k else []
    out = []
    for j in range(len(draft) + 1):
        out.append(model.distribution_for(model.context(seq)))
        if j < len(draft):
            seq.append(draft[j])
    return out


@dataclass
class ArDrafter:
    """Classic autoregressive drafter: a weaker ContextModel sampled left to right."""

    inner: ContextModel

    @property
    def vocab(self) -> Vocab:
        return self.inner.vocab


@dataclass
class DraftProposal:
    tokens: list[int]
    proposals: list[np.ndarray]
    drafter_steps: int

    @property
    def gamma(self) -> int:
        return len(self.tokens)


def ar_draft(drafter: ArDrafter, prefix, gamma: int, temperature: float, rng: SeededRng) -> DraftProposal:
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    model = drafter.inner
    seq = list(prefix[-model.order:]) if model.order else []
    tokens, proposals = [], []
    for _ in range(gamma):
        q = temperature_scale(model.distribution_for(model.context(seq)), temperature)
        tok = sample(q, rng)
        tokens.append(tok)
        proposals.append(q)
        seq.append(tok)
    return DraftProposal(tokens, proposals, drafter_steps=gamma)
