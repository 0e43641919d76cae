"""Glue between a RunConfig and the trained models: corpus loading, training, checkpoints."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from . import corpus as corpus_mod
from .bench import ModelSet, Scenario
from .config import RunConfig
from .core import SeededRng, Vocab
from .diffusion import AbsorbingSchedule, Denoiser, build_denoiser, train_denoiser
from .models import ArDrafter, ContextModel, train_context_model
from .specdec import CostModel

TRAIN_STREAM = 4
CHECKPOINTS = {"target": "target.ckpt", "ar": "ar_drafter.ckpt", "denoiser": "denoiser.ckpt"}


class MissingCheckpoint(FileNotFoundError):
    pass


class CorpusUnreadable(OSError):
    pass


def read_corpus(cfg: RunConfig) -> str:
    spec = cfg.data.corpus
    try:
        if spec.startswith("bundled:"):
            return corpus_mod.load_bundled(spec.split(":", 1)[1])
        return Path(spec).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError, KeyError) as exc:
        raise CorpusUnreadable(f"cannot read corpus {spec}: {exc}") from None


@dataclass
class TrainSummary:
    corpus_tokens: int
    vocab_size: int
    target_contexts: int
    ar_contexts: int
    denoiser_losses: list[float]
    seconds: float

    def lines(self) -> list[str]:
        losses = self.denoiser_losses
        loss = f"{losses[0]:.6f} -> {losses[-1]:.6f} over {len(losses)} epochs" if losses else "untrained"
        return [
            f"corpus tokens     {self.corpus_tokens}",
            f"vocab size        {self.vocab_size}",
            f"target contexts   {self.target_contexts}",
            f"ar contexts       {self.ar_contexts}",
            f"denoiser loss     {loss}",
            f"train seconds     {self.seconds:.1f}",
        ]


def train_models(cfg: RunConfig, log=None) -> tuple[ModelSet, AbsorbingSchedule, TrainSummary]:
    t0 = time.perf_counter()
    text = read_corpus(cfg)
    vocab = Vocab.from_text(text, cfg.data.vocab_mode)
    ids = vocab.encode(text)
    target = train_context_model(ids, cfg.target.order, cfg.target.smoothing_lambda, vocab)
    ar = ArDrafter(train_context_model(ids, cfg.ar_drafter.order, cfg.ar_drafter.smoothing_lambda, vocab))
    dc = cfg.denoiser
    den = build_denoiser(ids, vocab, context=dc.context, smoothing_lambda=dc.smoothing_lambda,
                         right_context=dc.right_context, n_step_buckets=dc.step_buckets)
    schedule = AbsorbingSchedule(dc.train_steps)
    losses = train_denoiser(den, ids, schedule, dc.epochs, dc.learning_rate, SeededRng(cfg.spec.seed, TRAIN_STREAM),
                            n_windows=dc.windows, block=dc.block, log=log)
    summary = TrainSummary(len(ids), len(vocab), len(target.counts), len(ar.inner.counts), losses,
                           time.perf_counter() - t0)
    return ModelSet(vocab, ids, target, ar, den), schedule, summary


def save_models(models: ModelSet, schedule: AbsorbingSchedule, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {k: out_dir / v for k, v in CHECKPOINTS.items()}
    models.target.save(paths["target"])
    models.ar.inner.save(paths["ar"])
    models.denoiser.save(paths["denoiser"], schedule)
    return list(paths.values())


def load_models(cfg: RunConfig, out_dir=None) -> ModelSet:
    out_dir = Path(out_dir or cfg.out_dir)
    paths = {k: out_dir / v for k, v in CHECKPOINTS.items()}
    missing = [str(p) for p in paths.values() if not p.is_file()]
    if missing:
        raise MissingCheckpoint("missing checkpoint(s): " + ", ".join(missing) + " (run `specdiff train` first)")
    target = ContextModel.load(paths["target"])
    ar = ArDrafter(ContextModel.load(paths["ar"]))
    den, _ = Denoiser.load(paths["denoiser"])
    corpus = den.index.stream.tolist()
    return ModelSet(target.vocab, corpus, target, ar, den)


def scenario_from(cfg: RunConfig, **overrides) -> Scenario:
    values = dict(
        name=cfg.bench.scenario, max_tokens=cfg.spec.max_tokens, trials=cfg.bench.trials,
        prompt_len=cfg.bench.prompt_len, seed=cfg.spec.seed, ar_gamma=cfg.spec.ar_gamma, gamma=cfg.spec.gamma,
        T=cfg.spec.steps, temperature=cfg.spec.temperature,
        drafter_kind=cfg.spec.drafter if cfg.spec.drafter != "ar" else "diffusion-multistep",
    )
    values.update(overrides)
    return Scenario(**values)


def cost_from(cfg: RunConfig) -> CostModel:
    b = cfg.bench
    return CostModel(b.target_call_cost, b.ar_step_cost, b.diff_step_cost)
