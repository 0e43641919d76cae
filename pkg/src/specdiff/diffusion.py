"""Absorbing-state discrete diffusion drafter.

The denoiser scores each masked position from up to four *anchors*:

* the tail of the clamped prefix, read ``d`` positions ahead;
* the nearest contiguous run of unmasked tokens to the left (and, optionally,
  to the right);
* a gapped anchor: occurrences of the prefix tail in the training text that
  agree with every draft token already revealed left of the position.

Each anchor contributes the smoothed log-probability of each token at its
distance, estimated from an occurrence index over the training text. Per
(slot, noise bucket, distance bucket, context length) weights and a per-token
bias are learned with the score-entropy loss; scores are
``ratio_scale(t) * exp(z)`` so the loss optimum is the true absorbing-chain
ratio. Without the right anchor a position only ever reads tokens to its left.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SeededRng, Vocab, sample_with_uniform, temperature_scale
from .models import FORMAT_VERSION, CheckpointError, DraftProposal, _read_header

# feature slots; RIGHT reads counts to the left of its context, the others to the right.
# The prefix anchor has its own weights when a gapped anchor sits next to it.
PREFIX, LEFT, RIGHT, GAPPED, PREFIX_BESIDE_GAPPED = 0, 1, 2, 3, 4
N_SLOTS = 5


class NonPositiveScore(ValueError):
    pass


class DivergedTraining(RuntimeError):
    pass


@dataclass(frozen=True)
class AbsorbingSchedule:
    """Log-linear noise: sigma(t) = -log(1 - t/T), so survival[t] = 1 - t/T."""

    T: int

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be at least 1")

    @property
    def survival(self) -> np.ndarray:
        return 1.0 - np.arange(self.T + 1) / self.T

    def survival_at(self, t: int) -> float:
        return 1.0 - t / self.T

    def noise_level(self, t: int) -> float:
        return t / self.T

    def reveal_probability(self, t: int) -> float:
        s_prev, s_now = self.survival_at(t - 1), self.survival_at(t)
        return (s_prev - s_now) / (1.0 - s_now)

    def ratio_scale(self, t: int) -> float:
        """p_t(unmasked to the clean token) / p_t(masked) for one position."""
        s = self.survival_at(t)
        return s / (1.0 - s)


def forward_corrupt(clean, t: int, schedule: AbsorbingSchedule, rng: SeededRng, mask_id: int,
                    clamp: int = 0) -> list[int]:
    """Mask each position at index >= ``clamp`` independently with prob 1 - survival[t]."""
    if not 0 <= t <= schedule.T:
        raise ValueError(f"step {t} outside [0, {schedule.T}]")
    clean = list(clean)
    p_mask = 1.0 - schedule.survival_at(t)
    hits = rng.random(len(clean) - clamp) < p_mask
    out = clean[:clamp]
    out.extend(mask_id if h else tok for tok, h in zip(clean[clamp:], hits))
    return out


def normalizer_K(a) -> np.ndarray:
    """K(a) = a (log a - 1), continuously extended with K(0) = 0."""
    a = np.asarray(a, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * (np.log(a) - 1.0)
    return np.where(a == 0, 0.0, out)


def score_entropy_term(score, ratio) -> np.ndarray:
    """s - r log s + K(r); zero exactly at s == r and positive elsewhere."""
    s = np.asarray(score, dtype=np.float64)
    r = np.asarray(ratio, dtype=np.float64)
    if np.any((s <= 0) & (r > 0)):
        raise NonPositiveScore("score must be positive where the ratio is positive")
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(r > 0, np.log(np.where(s > 0, s, 1.0)), 0.0)
    return s - r * logs + normalizer_K(r)


def _dist_bucket(d: int) -> int:
    return min(6, (d - 1).bit_length())


N_DIST_BUCKETS = 7


@dataclass
class AnchorIndex:
    """Occurrence index of every context of length 1..context over a token stream."""

    stream: np.ndarray
    context: int
    vocab_size: int
    positions: dict[tuple[int, ...], np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.positions:
            buckets: dict[tuple[int, ...], list[int]] = {}
            seq = self.stream.tolist()
            n = len(seq)
            for ell in range(1, self.context + 1):
                for start in range(n - ell + 1):
                    buckets.setdefault(tuple(seq[start : start + ell]), []).append(start)
            self.positions = {k: np.asarray(v, dtype=np.int64) for k, v in buckets.items()}
        self.unigram = np.bincount(self.stream, minlength=self.vocab_size).astype(np.float64)
        self._counts: dict = {}

    def counts(self, side: int, ctx: tuple[int, ...], d: int):
        """Token counts found ``d`` positions beyond an occurrence of ``ctx``."""
        key = (side, ctx, d)
        if key in self._counts:
            return self._counts[key]
        starts = self.positions.get(ctx)
        c = None
        if starts is not None:
            at = starts - d if side == RIGHT else starts + len(ctx) - 1 + d
            at = at[(at >= 0) & (at < self.stream.size)]
            if at.size:
                c = np.bincount(self.stream[at], minlength=self.vocab_size).astype(np.float64)
        self._counts[key] = c
        return c


@dataclass
class Denoiser:
    """Anchor-feature score model over the emittable tokens of ``vocab``."""

    vocab: Vocab
    index: AnchorIndex
    smoothing_lambda: float = 0.01
    right_context: bool = False
    n_step_buckets: int = 4
    weights: np.ndarray = None
    bias: np.ndarray = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)
    _experts: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self._emit = np.flatnonzero(self.vocab.emittable)
        shape = (N_SLOTS, self.n_step_buckets, N_DIST_BUCKETS, self.context + 1)
        if self.weights is None:
            self.weights = np.zeros(shape)
            self.weights[[PREFIX, PREFIX_BESIDE_GAPPED]] = 1.0
        if self.bias is None:
            self.bias = np.zeros(self._emit.size)
        if self.weights.shape != shape or self.bias.shape != (self._emit.size,):
            raise ValueError("parameter shapes do not match the denoiser configuration")
        uni = self.index.unigram[self._emit]
        self._log_unigram = np.log((uni + self.smoothing_lambda) / (uni.sum() + self.smoothing_lambda * uni.size))

    @property
    def context(self) -> int:
        return self.index.context

    def n_parameters(self) -> int:
        return self.weights.size + self.bias.size

    def step_bucket(self, level: float) -> int:
        return min(self.n_step_buckets - 1, int(level * self.n_step_buckets))

    # feature extraction

    def anchor(self, side: int, tokens, i: int, clamp: int):
        """Nearest unmasked draft run beside position ``i``: (ctx, distance) or None.

        The search stays inside the draft block; a left run that reaches the
        block start keeps reading into the prefix for up to ``context`` tokens.
        """
        mask_id = self.vocab.mask_id
        n = len(tokens)
        step = -1 if side == LEFT else 1
        j = i + step
        while clamp <= j < n and tokens[j] == mask_id:
            j += step
        if not clamp <= j < n:
            return None
        run = []
        k = j
        while 0 <= k < n and tokens[k] != mask_id and len(run) < self.context:
            run.append(tokens[k])
            k += step
        ctx = tuple(reversed(run)) if side == LEFT else tuple(run)
        return ctx, abs(j - i)

    def expert(self, side: int, ctx: tuple[int, ...], d: int):
        """(context length actually used, smoothed log-probs over emittable tokens)."""
        key = (side, ctx, d)
        hit = self._experts.get(key)
        if hit is not None:
            return hit
        lam = self.smoothing_lambda
        out = (0, self._log_unigram)
        for ell in range(len(ctx), 0, -1):
            sub = ctx[:ell] if side == RIGHT else ctx[-ell:]
            c = self.index.counts(side, sub, d)
            if c is not None:
                c = c[self._emit]
                out = (ell, np.log((c + lam) / (c.sum() + lam * c.size)))
                break
        self._experts[key] = out
        return out

    def _prefetch_prefix_experts(self, ctx: tuple[int, ...], ds) -> None:
        """Fill the expert cache for the prefix anchor at several distances with one count."""
        ds = np.array([d for d in ds if (PREFIX, ctx, d) not in self._experts], dtype=np.int64)
        if not ds.size:
            return
        for ell in range(len(ctx), 0, -1):
            starts = self.index.positions.get(ctx[-ell:])
            if starts is not None:
                break
        else:
            return
        stream, V = self.index.stream, self.index.vocab_size
        at = (starts + ell - 1)[:, None] + ds[None, :]
        ok = at < stream.size
        cols = np.broadcast_to(np.arange(ds.size), at.shape)[ok]
        table = np.bincount(cols * V + stream[at[ok]], minlength=ds.size * V).reshape(ds.size, V)
        lam = self.smoothing_lambda
        for d, row in zip(ds.tolist(), table):
            c = row[self._emit].astype(np.float64)
            if c.sum() > 0:  # otherwise leave it to the per-distance backoff
                self._experts[(PREFIX, ctx, d)] = (ell, np.log((c + lam) / (c.sum() + lam * c.size)))

    def gapped(self, tokens, positions, clamp: int) -> dict:
        """Gapped anchors for the masked ``positions``: {i: (prefix context length, log-probs)}.

        Starts from every occurrence of the longest indexed tail of the prefix
        and, scanning the block left to right, keeps only occurrences whose
        continuation agrees with each revealed draft token. A position gets no
        entry when nothing left of it is revealed or no occurrence survives.
        """
        out = {}
        if clamp == 0 or not positions:
            return out
        ctx = tuple(tokens[max(0, clamp - self.context):clamp])
        for ell in range(len(ctx), 0, -1):
            starts = self.index.positions.get(ctx[-ell:])
            if starts is not None:
                break
        else:
            return out
        stream = self.index.stream
        base = starts + ell - 1
        wanted = set(positions)
        mask_id = self.vocab.mask_id
        lam = self.smoothing_lambda
        constrained = False
        for j in range(clamp, max(positions) + 1):
            d = j - clamp + 1
            base = base[base + d < stream.size]
            if j in wanted and constrained and base.size:
                c = np.bincount(stream[base + d], minlength=self.index.vocab_size)[self._emit].astype(np.float64)
                out[j] = (ell, np.log((c + lam) / (c.sum() + lam * c.size)))
            if tokens[j] != mask_id:
                base = base[stream[base + d] == tokens[j]]
                constrained = True
            if not base.size:
                break
        return out

    def features(self, tokens, i: int, level: float, clamp: int, gapped=None):
        """(weight index, log-prob vector, cache key) for each anchor of position ``i``.

        ``gapped`` is the output of :meth:`gapped` for a batch containing ``i``;
        it is computed here when omitted.
        """
        b = self.step_bucket(level)
        if gapped is None:
            gapped = self.gapped(tokens, [i], clamp)
        g = gapped.get(i)
        anchors = []
        if clamp > 0:
            slot = PREFIX if g is None else PREFIX_BESIDE_GAPPED
            anchors.append((slot, PREFIX, tuple(tokens[max(0, clamp - self.context):clamp]), i - clamp + 1))
        for side in ((LEFT, RIGHT) if self.right_context else (LEFT,)):
            a = self.anchor(side, tokens, i, clamp)
            if a is not None:
                anchors.append((side, side) + a)
        out = []
        for slot, side, ctx, d in anchors:
            ell, vec = self.expert(side, ctx, d)
            out.append(((slot, b, _dist_bucket(d), ell), vec, (slot, ctx, d)))
        if g is not None:
            # keys of gapped features would be nearly unique per draft; None disables caching
            out.append(((GAPPED, b, _dist_bucket(i - clamp + 1), g[0]), g[1], None))
        return out

    def logits(self, feats) -> np.ndarray:
        z = self.bias.copy()
        for widx, vec, _ in feats:
            z += self.weights[widx] * vec
        return z

    def position_distributions(self, tokens, positions, level: float, clamp: int) -> list[np.ndarray]:
        """Normalized distributions over the full vocab (zero on BOS/MASK), one per position."""
        gapped = self.gapped(tokens, positions, clamp)
        if clamp > 0:
            self._prefetch_prefix_experts(tuple(tokens[max(0, clamp - self.context):clamp]),
                                          [i - clamp + 1 for i in positions])
        sb = self.step_bucket(level)
        out = []
        for i in positions:
            feats = self.features(tokens, i, level, clamp, gapped)
            cacheable = i not in gapped
            key = (sb,) + tuple(f[2] for f in feats) if cacheable else None
            dist = self._cache.get(key) if cacheable else None
            if dist is None:
                z = self.logits(feats)
                z = np.exp(z - z.max())
                dist = np.zeros(len(self.vocab))
                dist[self._emit] = z / z.sum()
                dist.flags.writeable = False
                if cacheable:
                    self._cache[key] = dist
            out.append(dist)
        return out

    def position_distribution(self, tokens, i: int, level: float, clamp: int) -> np.ndarray:
        return self.position_distributions(tokens, [i], level, clamp)[0]

    def scores(self, tokens, i: int, t: int, schedule: AbsorbingSchedule, clamp: int):
        """Unnormalized scores s(x)_y for unmasking position ``i`` to each emittable token."""
        feats = self.features(tokens, i, schedule.noise_level(t), clamp)
        return schedule.ratio_scale(t) * np.exp(self.logits(feats))

    def invalidate(self):
        self._cache.clear()
        self._experts.clear()

    # checkpoint I/O

    def save(self, path, schedule: AbsorbingSchedule | None = None) -> None:
        stream = self.index.stream.tolist()
        lines = [
            f"format_version={FORMAT_VERSION}",
            "kind=denoiser",
            "schedule=loglinear",
            f"train_T={schedule.T if schedule else 0}",
            f"context={self.context}",
            f"lambda={self.smoothing_lambda!r}",
            f"right_context={int(self.right_context)}",
            f"n_step_buckets={self.n_step_buckets}",
            f"vocab_mode={self.vocab.mode}",
            "vocab=" + json.dumps(list(self.vocab.symbols), ensure_ascii=True),
            f"stream_length={len(stream)}",
            "end_header=1",
            "weights " + " ".join(repr(float(w)) for w in self.weights.ravel()),
            "bias " + " ".join(repr(float(b)) for b in self.bias),
        ]
        for s in range(0, len(stream), 64):
            lines.append("stream " + " ".join(map(str, stream[s : s + 64])))
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> tuple["Denoiser", AbsorbingSchedule | None]:
        header, body = _read_header(Path(path).read_text(encoding="ascii").splitlines(), "denoiser")
        vocab = Vocab(tuple(json.loads(header["vocab"])), header["vocab_mode"])
        weights = bias = None
        stream: list[int] = []
        for line in body:
            tag, _, rest = line.partition(" ")
            if tag == "weights":
                weights = np.array([float(x) for x in rest.split()])
            elif tag == "bias":
                bias = np.array([float(x) for x in rest.split()])
            elif tag == "stream":
                stream.extend(int(x) for x in rest.split())
        if weights is None or bias is None or len(stream) != int(header["stream_length"]):
            raise CheckpointError(f"truncated denoiser checkpoint {path}")
        context = int(header["context"])
        n_step = int(header["n_step_buckets"])
        index = AnchorIndex(np.asarray(stream, dtype=np.int64), context, len(vocab))
        den = cls(vocab, index, float(header["lambda"]), bool(int(header["right_context"])), n_step,
                  weights.reshape(N_SLOTS, n_step, N_DIST_BUCKETS, context + 1), bias)
        train_T = int(header["train_T"])
        return den, (AbsorbingSchedule(train_T) if train_T else None)


def build_denoiser(stream, vocab: Vocab, context: int = 6, smoothing_lambda: float = 0.01,
                   right_context: bool = False, n_step_buckets: int = 4) -> Denoiser:
    stream = np.asarray(list(stream), dtype=np.int64)
    if stream.size == 0:
        raise ValueError("denoiser corpus is empty")
    index = AnchorIndex(stream, context, len(vocab))
    return Denoiser(vocab, index, smoothing_lambda, right_context, n_step_buckets)


# training


@dataclass
class TrainingBatch:
    """Flattened masked positions: feature slots, log-prob vectors, targets, ratio scales."""

    widx: np.ndarray      # (n, N_SLOTS) flat weight index per slot, -1 when the anchor is absent
    vecs: np.ndarray      # (n, N_SLOTS, E)
    target: np.ndarray    # (n,) index into emittable tokens
    scale: np.ndarray     # (n,) ratio_scale(t)

    def __len__(self):
        return self.target.size


def corrupted_positions(den: Denoiser, clean, corrupted, t: int, schedule: AbsorbingSchedule, clamp: int):
    """Per masked position: (features, emittable target index, ratio scale)."""
    emit_pos = {tok: k for k, tok in enumerate(den._emit)}
    level = schedule.noise_level(t)
    masked = [i for i in range(clamp, len(corrupted)) if corrupted[i] == den.vocab.mask_id]
    gapped = den.gapped(corrupted, masked, clamp)
    return [(den.features(corrupted, i, level, clamp, gapped), emit_pos[clean[i]], schedule.ratio_scale(t))
            for i in masked]


def make_batch(den: Denoiser, examples) -> TrainingBatch:
    n, E = len(examples), den._emit.size
    widx = np.full((n, N_SLOTS), -1, dtype=np.int64)
    vecs = np.zeros((n, N_SLOTS, E))
    target = np.empty(n, dtype=np.int64)
    scale = np.empty(n)
    for r, (feats, tgt, c) in enumerate(examples):
        for widx_tuple, vec, _ in feats:
            side = widx_tuple[0]
            widx[r, side] = np.ravel_multi_index(widx_tuple, den.weights.shape)
            vecs[r, side] = vec
        target[r] = tgt
        scale[r] = c
    return TrainingBatch(widx, vecs, target, scale)


def score_entropy_loss(den: Denoiser, clean, corrupted, t: int, schedule: AbsorbingSchedule,
                       clamp: int = 0, weights: float = 1.0) -> float:
    """Score-entropy loss summed over the masked positions of one corrupted sequence.

    Only MASK -> token transitions carry weight (``weights``, uniform); the
    target ratio for unmasking to token v is ratio_scale(t) if v is the clean
    token and 0 otherwise.
    """
    total = 0.0
    for feats, tgt, c in corrupted_positions(den, clean, corrupted, t, schedule, clamp):
        s = c * np.exp(den.logits(feats))
        r = np.zeros_like(s)
        r[tgt] = c
        total += weights * float(score_entropy_term(s, r).sum())
    return total


def batch_loss_and_grad(den: Denoiser, batch: TrainingBatch, weights=None, bias=None):
    """Mean per-position loss and its exact gradient w.r.t. (weights, bias)."""
    w = den.weights if weights is None else weights
    b = den.bias if bias is None else bias
    flat = w.ravel()
    n = len(batch)
    present = batch.widx >= 0
    coef = np.where(present, flat[np.maximum(batch.widx, 0)], 0.0)
    z = b[None, :] + np.einsum("ns,nse->ne", coef, batch.vecs)
    s = batch.scale[:, None] * np.exp(z)
    rows = np.arange(n)
    c = batch.scale
    # sum_v s_v - c z_target - c  ==  sum_v [s - r log s + K(r)]
    loss_terms = s.sum(axis=1) - c * z[rows, batch.target] - c
    loss = float(loss_terms.sum() / n)
    resid = s
    resid[rows, batch.target] -= c
    resid /= n
    g_bias = resid.sum(axis=0)
    g_coef = np.einsum("ne,nse->ns", resid, batch.vecs)
    g_flat = np.zeros_like(flat)
    np.add.at(g_flat, batch.widx[present], g_coef[present])
    return loss, g_flat.reshape(w.shape), g_bias


def sample_training_batch(den: Denoiser, stream, schedule: AbsorbingSchedule, n_windows: int,
                          block: int, rng: SeededRng) -> TrainingBatch:
    stream = list(stream)
    clamp = den.context
    span = clamp + block
    if len(stream) <= span:
        raise ValueError("corpus shorter than one training window")
    starts = rng.gen.integers(0, len(stream) - span, size=n_windows)
    steps = rng.gen.integers(1, schedule.T, size=n_windows, endpoint=False)  # t = T carries no signal
    examples = []
    for st, t in zip(starts.tolist(), steps.tolist()):
        clean = stream[st : st + span]
        corrupted = forward_corrupt(clean, int(t), schedule, rng, den.vocab.mask_id, clamp=clamp)
        examples.extend(corrupted_positions(den, clean, corrupted, int(t), schedule, clamp))
    return make_batch(den, examples)


def train_denoiser(den: Denoiser, stream, schedule: AbsorbingSchedule, epochs: int, learning_rate: float,
                   rng: SeededRng, n_windows: int = 400, block: int = 48, log=None) -> list[float]:
    """Full-batch gradient descent on the score-entropy loss; returns the per-epoch losses.

    The step size is halved whenever an update would raise the loss, so the
    logged loss is non-increasing.
    """
    if epochs <= 0:
        return []
    batch = sample_training_batch(den, stream, schedule, n_windows, block, rng)
    lr = learning_rate
    loss, gw, gb = batch_loss_and_grad(den, batch)
    history = []
    for epoch in range(epochs):
        while True:
            w_new = den.weights - lr * gw
            b_new = den.bias - lr * gb
            new_loss, new_gw, new_gb = batch_loss_and_grad(den, batch, w_new, b_new)
            if not math.isfinite(new_loss) and lr < 1e-12:
                raise DivergedTraining(f"loss became non-finite at epoch {epoch}")
            if math.isfinite(new_loss) and new_loss <= loss:
                break
            lr *= 0.5
            if lr < 1e-12:
                new_loss, w_new, b_new, new_gw, new_gb = loss, den.weights, den.bias, gw, gb
                break
        den.weights, den.bias = w_new, b_new
        loss, gw, gb = new_loss, new_gw, new_gb
        history.append(loss)
        if log is not None:
            log(epoch, loss)
    den.invalidate()
    return history


# reverse process


@dataclass(frozen=True)
class DiffusionState:
    tokens: tuple[int, ...]
    step: int
    prefix_len: int
    proposals: tuple = ()  # (position, distribution) in reveal order


def initial_state(prefix, gamma: int, T: int, mask_id: int, context: int) -> DiffusionState:
    tail = tuple(prefix[-context:]) if context else ()
    return DiffusionState(tail + (mask_id,) * gamma, T, len(tail))


def reverse_step(den: Denoiser, state: DiffusionState, schedule: AbsorbingSchedule, rng: SeededRng,
                 temperature: float = 1.0) -> DiffusionState:
    """One t -> t-1 transition; all reveals in a step read the same (pre-step) state."""
    t = state.step
    if t < 1:
        raise ValueError("cannot step below t = 0")
    mask_id = den.vocab.mask_id
    tokens = state.tokens
    masked = [i for i in range(state.prefix_len, len(tokens)) if tokens[i] == mask_id]
    if t == 1:
        chosen = masked
    else:
        p = schedule.reveal_probability(t)
        coins = rng.random(len(masked))
        chosen = [i for i, u in zip(masked, coins) if u < p]
    level = schedule.noise_level(t)
    dists = [temperature_scale(q, temperature)
             for q in den.position_distributions(tokens, chosen, level, state.prefix_len)]
    new = list(tokens)
    recorded = list(state.proposals)
    if chosen:
        us = rng.random(len(chosen))
        for i, q, u in zip(chosen, dists, us):
            new[i] = sample_with_uniform(q, u)
            recorded.append((i, q))
    return DiffusionState(tuple(new), t - 1, state.prefix_len, tuple(recorded))


def diffusion_draft(den: Denoiser, prefix, gamma: int, T: int, temperature: float, rng: SeededRng,
                    mode: str = "multistep") -> DraftProposal:
    """Draft ``gamma`` tokens by running the reverse chain from an all-MASK block.

    ``factorized`` mode reveals every position in one pass conditioned only on
    the prefix (a single denoiser evaluation).
    """
    if gamma < 1 or T < 1:
        raise ValueError("gamma and T must be at least 1")
    if mode not in ("multistep", "factorized"):
        raise ValueError(f"unknown diffusion mode {mode!r}")
    steps = T if mode == "multistep" else 1
    schedule = AbsorbingSchedule(steps)
    state = initial_state(prefix, gamma, steps, den.vocab.mask_id, den.context)
    while state.step > 0:
        state = reverse_step(den, state, schedule, rng, temperature)
    by_pos = dict(state.proposals)
    lo = state.prefix_len
    tokens = list(state.tokens[lo:])
    proposals = [by_pos[lo + j] for j in range(gamma)]
    return DraftProposal(tokens, proposals, drafter_steps=steps)


def factorized_proposals(den: Denoiser, prefix, gamma: int, temperature: float = 1.0) -> list[np.ndarray]:
    """The per-position distributions the factorized drafter samples from."""
    state = initial_state(prefix, gamma, 1, den.vocab.mask_id, den.context)
    positions = [state.prefix_len + j for j in range(gamma)]
    return [temperature_scale(q, temperature)
            for q in den.position_distributions(state.tokens, positions, 1.0, state.prefix_len)]

