"""Vocabulary, probability-vector arithmetic and seeded sampling.

Distributions are plain 1-D float64 numpy arrays indexed by token id. The
helpers here never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BOS = "<bos>"
MASK = "<mask>"

PROB_TOL = 1e-9


class AllZeroWeights(ValueError):
    pass


class NonPositiveTemperature(ValueError):
    pass


class InvalidDistribution(ValueError):
    pass


@dataclass(frozen=True)
class Vocab:
    """Ordered token symbols plus the two reserved entries (BOS padding, MASK).

    ``mode`` is ``"byte"`` (one symbol per byte, stored as a latin-1 char) or
    ``"whitespace"`` (one symbol per whitespace-delimited word).
    """

    symbols: tuple[str, ...]
    mode: str = "byte"
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("vocab symbols must be distinct")
        if MASK not in self.symbols or BOS not in self.symbols:
            raise ValueError("vocab must contain the BOS and MASK symbols")
        if self.mode not in ("byte", "whitespace"):
            raise ValueError(f"unknown vocab mode {self.mode!r}")
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.symbols)})

    @classmethod
    def from_text(cls, text: str, mode: str = "byte") -> "Vocab":
        if mode == "byte":
            units = sorted({chr(b) for b in text.encode("utf-8")})
        elif mode == "whitespace":
            units = sorted(set(text.split()))
        else:
            raise ValueError(f"unknown vocab mode {mode!r}")
        if BOS in units or MASK in units:
            raise ValueError(f"corpus contains a reserved symbol ({BOS} or {MASK})")
        return cls(tuple(units) + (BOS, MASK), mode)

    def __len__(self):
        return len(self.symbols)

    @property
    def mask_id(self) -> int:
        return self.index[MASK]

    @property
    def bos_id(self) -> int:
        return self.index[BOS]

    @property
    def emittable(self) -> np.ndarray:
        """Boolean mask of tokens a model may generate (everything but BOS/MASK)."""
        keep = np.ones(len(self.symbols), dtype=bool)
        keep[[self.bos_id, self.mask_id]] = False
        return keep

    def encode(self, text: str) -> list[int]:
        units = [chr(b) for b in text.encode("utf-8")] if self.mode == "byte" else text.split()
        try:
            return [self.index[u] for u in units]
        except KeyError as exc:
            raise ValueError(f"symbol {exc.args[0]!r} is not in the vocabulary") from None

    def decode(self, ids) -> str:
        units = [self.symbols[i] for i in ids if i not in (self.bos_id, self.mask_id)]
        if self.mode == "byte":
            return bytes(ord(u) for u in units).decode("utf-8", errors="replace")
        return " ".join(units)


class SeededRng:
    """numpy Generator keyed by (root seed, stream id).

    Each consumer asks for its own stream so results do not depend on the order
    in which modules draw numbers. Stream ids used by the package:

    =====  ==========================================
    1      drafter sampling (AR and diffusion)
    2      verification uniforms and corrections
    3      vanilla target sampling
    4      forward corruption / denoiser training data
    5      benchmark prompt selection
    =====  ==========================================

    Benchmark trials get their own root seeds from :func:`derive_seed`.
    """

    def __init__(self, seed: int, stream: int | tuple[int, ...] = 0):
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self.stream = tuple(stream) if isinstance(stream, tuple) else (int(stream),)
        self.gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.stream))
        )

    def child(self, *stream: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream + tuple(stream))

    def random(self, size=None):
        return self.gen.random(size)

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream={self.stream})"


def derive_seed(seed: int, *key: int) -> int:
    """Independent 64-bit seed for the sub-task ``key`` of a run rooted at ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def check_categorical(probs, tol: float = PROB_TOL) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidDistribution("distribution must be a non-empty vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InvalidDistribution("distribution has negative or non-finite entries")
    if abs(p.sum() - 1.0) > tol:
        raise InvalidDistribution(f"distribution sums to {p.sum()!r}, not 1")
    return p


def normalize(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise AllZeroWeights("cannot normalize an all-zero weight vector")
    return w / total


def temperature_scale(dist, temperature: float) -> np.ndarray:
    """Renormalized ``p ** (1 / temperature)``; identity at temperature 1."""
    if not temperature > 0:
        raise NonPositiveTemperature(f"temperature must be positive, got {temperature}")
    p = np.asarray(dist, dtype=np.float64)
    if temperature == 1.0:
        return p
    # log-space keeps tiny temperatures from underflowing to all-zero
    with np.errstate(divide="ignore"):
        logp = np.log(p) / temperature
    logp -= logp.max()
    return normalize(np.exp(logp))


def sample(dist, rng: SeededRng) -> int:
    """Inverse-CDF draw; never returns an id with zero probability."""
    p = np.asarray(dist)
    cdf = np.cumsum(p)
    u = rng.gen.random() * cdf[-1]
    idx = int(np.searchsorted(cdf, u, side="right"))
    # guard the edge u == cdf[-1] and zero-mass tails
    idx = min(idx, p.size - 1)
    while p[idx] <= 0:
        idx -= 1
    return idx


def sample_with_uniform(dist, u: float) -> int:
    """Same as :func:`sample` but with the uniform supplied by the caller."""
    p = np.asarray(dist)
    cdf = np.cumsum(p)
    idx = min(int(np.searchsorted(cdf, u * cdf[-1], side="right")), p.size - 1)
    while p[idx] <= 0:
        idx -= 1
    return idx


def residual_distribution(p, q) -> np.ndarray:
    """norm(max(0, p - q)); falls back to ``p`` when the residual vanishes."""
    p = np.asarray(p, dtype=np.float64)
    diff = np.maximum(p - np.asarray(q, dtype=np.float64), 0.0)
    if diff.sum() <= 0:
        return p
    return diff / diff.sum()


def overlap(p, q) -> float:
    """sum_x min(p(x), q(x)): the chance a token drawn from q survives the p/q test."""
    return float(np.minimum(np.asarray(p), np.asarray(q)).sum())
