"""Vanilla, classic speculative, and diffusion-drafted speculative decoding."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import SeededRng, residual_distribution, sample, sample_with_uniform, temperature_scale
from .diffusion import Denoiser, diffusion_draft
from .models import ArDrafter, ContextModel, DraftProposal, ar_draft, next_distribution, parallel_score

DRAFTER_KINDS = ("ar", "diffusion-multistep", "diffusion-factorized")

# stream ids, see SeededRng
DRAFT_STREAM, VERIFY_STREAM, VANILLA_STREAM = 1, 2, 3


class ZeroProposalMass(ValueError):
    pass


@dataclass(frozen=True)
class SpecConfig:
    gamma: int = 5
    T: int = 8
    temperature: float = 1.0
    drafter_kind: str = "ar"
    seed: int = 0
    max_tokens: int = 1024
    break_acceptance: bool = False  # test hook: corrupts the acceptance ratio

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.drafter_kind not in DRAFTER_KINDS:
            raise ValueError(f"drafter_kind must be one of {DRAFTER_KINDS}")


@dataclass(frozen=True)
class CostModel:
    """Per-evaluation costs in units of one target forward pass."""

    target_call_cost: float = 1.0
    ar_step_cost: float = 0.06
    diff_step_cost: float = 0.06

    def __post_init__(self):
        if min(self.target_call_cost, self.ar_step_cost, self.diff_step_cost) <= 0:
            raise ValueError("all costs must be positive")

    def step_cost(self, drafter_kind: str) -> float:
        return self.ar_step_cost if drafter_kind == "ar" else self.diff_step_cost

    def scaled(self, factor: float) -> "CostModel":
        return CostModel(self.target_call_cost * factor, self.ar_step_cost * factor, self.diff_step_cost * factor)


@dataclass
class StepOutcome:
    accepted: int
    emitted: list[int]
    per_token_ratios: list[float]
    gamma: int

    @property
    def tested(self) -> int:
        return min(self.accepted + 1, self.gamma)


@dataclass
class RunStats:
    gamma: int = 0
    drafter_kind: str = "vanilla"
    target_calls: int = 0
    drafter_steps: int = 0
    drafts: int = 0
    accepted_total: int = 0
    tested_total: int = 0
    emitted_total: int = 0
    wall_ns: int = 0
    sim_cost: float = 0.0

    @property
    def alpha_hat(self) -> float:
        return self.accepted_total / (self.gamma * self.drafts) if self.drafts else float("nan")

    @property
    def accepted_per_draft(self) -> float:
        return self.accepted_total / self.drafts if self.drafts else float("nan")

    def price(self, cost: CostModel) -> float:
        step = 0.0 if self.drafter_kind == "vanilla" else cost.step_cost(self.drafter_kind)
        return self.target_calls * cost.target_call_cost + self.drafter_steps * step

    def deterministic_fields(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "wall_ns"}


def verify(draft: DraftProposal, target_dists, rng: SeededRng, break_acceptance: bool = False) -> StepOutcome:
    """Left-to-right p/q acceptance test over one drafted block.

    ``target_dists[j]`` is read only for positions the scan actually reaches
    (plus the correction position). ``rng`` always yields gamma uniforms for
    the test and one more for the emitted correction/bonus token.
    """
    gamma = draft.gamma
    r = rng.random(gamma)
    ratios = []
    accepted = gamma
    for j in range(gamma):
        x = draft.tokens[j]
        q = draft.proposals[j]
        if q[x] <= 0:
            raise ZeroProposalMass(f"draft token {x} at position {j} has zero proposal mass")
        p = target_dists[j]
        ratio = p[x] / q[x]
        ratios.append(float(ratio))
        if break_acceptance:
            ratio = np.sqrt(ratio)
        if not r[j] < ratio:
            accepted = j
            break
    if accepted < gamma:
        final = residual_distribution(target_dists[accepted], draft.proposals[accepted])
    else:
        final = target_dists[gamma]
    tok = sample_with_uniform(final, rng.random())
    return StepOutcome(accepted, list(draft.tokens[:accepted]) + [tok], ratios, gamma)


def make_draft(drafter, prefix, cfg: SpecConfig, rng: SeededRng) -> DraftProposal:
    if cfg.drafter_kind == "ar":
        if not isinstance(drafter, ArDrafter):
            raise TypeError("drafter_kind 'ar' needs an ArDrafter")
        return ar_draft(drafter, prefix, cfg.gamma, cfg.temperature, rng)
    if not isinstance(drafter, Denoiser):
        raise TypeError(f"drafter_kind {cfg.drafter_kind!r} needs a Denoiser")
    mode = cfg.drafter_kind.split("-", 1)[1]
    return diffusion_draft(drafter, prefix, cfg.gamma, cfg.T, cfg.temperature, rng, mode=mode)


def spec_step(target: ContextModel, drafter, prefix, cfg: SpecConfig, rng: SeededRng,
              verify_rng: SeededRng | None = None, stats: RunStats | None = None) -> StepOutcome:
    """Draft, score the block in one target pass, verify."""
    if len(prefix) == 0:
        raise ValueError("prefix must be non-empty")
    draft = make_draft(drafter, prefix, cfg, rng)
    dists = parallel_score(target, prefix, draft.tokens)
    if cfg.temperature != 1.0:
        dists = [temperature_scale(p, cfg.temperature) for p in dists]
    outcome = verify(draft, dists, verify_rng or rng, cfg.break_acceptance)
    if stats is not None:
        stats.target_calls += 1
        stats.drafter_steps += draft.drafter_steps
        stats.drafts += 1
        stats.tested_total += outcome.tested
    return outcome


def generate(target: ContextModel, drafter, prompt, cfg: SpecConfig, cost: CostModel | None = None):
    """Speculative generation of ``cfg.max_tokens`` new tokens; returns (new tokens, RunStats).

    A final step that overshoots the budget is truncated and only the kept
    tokens are counted as accepted.
    """
    if len(prompt) == 0:
        raise ValueError("prompt must be non-empty")
    cost = cost or CostModel()
    draft_rng = SeededRng(cfg.seed, DRAFT_STREAM)
    verify_rng = SeededRng(cfg.seed, VERIFY_STREAM)
    stats = RunStats(gamma=cfg.gamma, drafter_kind=cfg.drafter_kind)
    seq = list(prompt)
    out: list[int] = []
    t0 = time.perf_counter_ns()
    while len(out) < cfg.max_tokens:
        outcome = spec_step(target, drafter, seq, cfg, draft_rng, verify_rng, stats)
        room = cfg.max_tokens - len(out)
        kept = outcome.emitted[:room]
        stats.accepted_total += min(outcome.accepted, len(kept))
        out.extend(kept)
        seq.extend(kept)
    stats.wall_ns = time.perf_counter_ns() - t0
    stats.emitted_total = len(out)
    stats.sim_cost = stats.price(cost)
    return out, stats


def vanilla_generate(target: ContextModel, prompt, max_tokens: int, temperature: float = 1.0,
                     rng: SeededRng | None = None, seed: int = 0, cost: CostModel | None = None):
    """One target call per token; the reference run for speedup ratios."""
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    rng = rng or SeededRng(seed, VANILLA_STREAM)
    cost = cost or CostModel()
    stats = RunStats(drafter_kind="vanilla")
    seq = list(prompt)
    out = []
    t0 = time.perf_counter_ns()
    for _ in range(max_tokens):
        p = next_distribution(target, seq)
        if temperature != 1.0:
            p = temperature_scale(p, temperature)
        tok = sample(p, rng)
        out.append(tok)
        seq.append(tok)
        stats.target_calls += 1
    stats.wall_ns = time.perf_counter_ns() - t0
    stats.emitted_total = len(out)
    stats.sim_cost = stats.price(cost)
    return out, stats
