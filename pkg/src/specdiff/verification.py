"""Self-checks behind ``specdiff verify``: exact block-law oracles, Monte Carlo
next-token TV against the target, acceptance-rate identities and gradient checks.

Every check returns a :class:`CheckResult` carrying the measured value, the
threshold and the margin between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bench import (
    completed_block_law, context_tv, empirical_tv, exact_step_oracle, max_law_gap, measure_alpha,
    target_chain_law, ModelSet,
)
from .core import SeededRng, Vocab, derive_seed
from .diffusion import (
    AbsorbingSchedule, batch_loss_and_grad, build_denoiser, factorized_proposals, sample_training_batch,
    score_entropy_term, train_denoiser,
)
from .models import ArDrafter, ContextModel, train_context_model
from .specdec import SpecConfig, generate, vanilla_generate

ORACLE_TOL = 1e-10
TV_TOL = 0.02
GRAD_TOL = 1e-4
FD_STEP = 1e-5

ORACLE_KEY, TV_KEY, VANILLA_TV_KEY, GRAD_KEY = 20, 21, 22, 23


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: value={self.value:.3g} threshold={self.threshold:.3g} {self.detail}".rstrip()


# exact oracle over random small instances


def small_vocab(n_symbols: int) -> Vocab:
    return Vocab(tuple("abcdef"[:n_symbols]) + ("<bos>", "<mask>"))


def random_instance(rng: np.random.Generator):
    """A tiny target plus a factorized drafter: (target, proposals, prefix, gamma).

    Half of the drafters are trained factorized denoisers on the same toy text,
    the other half arbitrary factorized proposals (Dirichlet draws, some with
    holes in their support).
    """
    n_sym = int(rng.integers(2, 7))
    vocab = small_vocab(n_sym)
    length = int(rng.integers(12, 40))
    text_ids = rng.integers(0, n_sym, size=length).tolist()
    order = int(rng.integers(0, 3))
    lam = float(rng.choice([1e-3, 0.1, 1.0]))
    target = train_context_model(text_ids, order, lam, vocab)
    gamma = int(rng.integers(1, 3))
    prefix = rng.integers(0, n_sym, size=int(rng.integers(1, 4))).tolist()
    if rng.random() < 0.5:
        den = build_denoiser(text_ids, vocab, context=2, smoothing_lambda=0.05)
        train_denoiser(den, text_ids, AbsorbingSchedule(4), 3, 0.5, SeededRng(int(rng.integers(2**32)), 4),
                       n_windows=4, block=4)
        proposals = factorized_proposals(den, prefix, gamma)
    else:
        proposals = []
        for _ in range(gamma):
            q = np.zeros(len(vocab))
            w = rng.dirichlet(np.full(n_sym, 0.7))
            if n_sym > 2 and rng.random() < 0.3:
                w[int(rng.integers(n_sym))] = 0.0
                w /= w.sum()
            q[:n_sym] = w
            proposals.append(q)
    return target, proposals, prefix, gamma


def exact_oracle_check(n_instances: int = 50, seed: int = 0, break_acceptance: bool = False) -> CheckResult:
    rng = np.random.default_rng(derive_seed(seed, ORACLE_KEY))
    worst = 0.0
    for _ in range(n_instances):
        target, proposals, prefix, gamma = random_instance(rng)
        block_law, _ = exact_step_oracle(target, proposals, prefix, gamma, break_acceptance)
        horizon = gamma + 1
        gap = max_law_gap(completed_block_law(target, prefix, block_law, horizon),
                          target_chain_law(target, prefix, horizon))
        worst = max(worst, gap)
    return CheckResult("exact_block_law", worst <= ORACLE_TOL, worst, ORACLE_TOL,
                       f"({n_instances} instances, max per-outcome gap)")


# acceptance-rate identities


def two_point_fixture():
    """Target p = [0.5, 0.5] and drafter q = [0.9, 0.1], both order 0, exact in floating point."""
    vocab = small_vocab(2)
    p = ContextModel(0, 1.0, vocab, {(): {0: 1, 1: 1}})
    q = ContextModel(0, 1.0, vocab, {(): {0: 8}})
    return p, ArDrafter(q)


def alpha_fixture_check(trials: int = 100_000, seed: int = 0) -> CheckResult:
    target, drafter = two_point_fixture()
    est = measure_alpha(target, drafter, [[0]], trials, SpecConfig(gamma=1, drafter_kind="ar", seed=seed))
    err = abs(est.alpha - 0.6)
    return CheckResult("alpha_two_point_fixture", err <= 0.01, est.alpha, 0.6,
                       f"(|alpha - 0.6| = {err:.4f}, tolerance 0.01, analytic {est.analytic:.6f})")


def alpha_self_check(models: ModelSet, drafts: int = 10_000, seed: int = 0, gamma: int = 5) -> CheckResult:
    prompts = [models.corpus[s : s + 16] for s in range(0, len(models.corpus) - 16, max(1, len(models.corpus) // 97))]
    est = measure_alpha(models.target, ArDrafter(models.target), prompts, drafts,
                        SpecConfig(gamma=gamma, drafter_kind="ar", seed=seed))
    return CheckResult("alpha_drafter_equals_target", est.alpha >= 0.99, est.alpha, 0.99,
                       f"({drafts} drafts)")


# Monte Carlo TV against the target


def spec_samples(models: ModelSet, tokens: int, T: int, gamma: int, seed: int, run_len: int = 1024,
                 break_acceptance: bool = False, drafter_kind: str = "diffusion-multistep"):
    runs = math.ceil(tokens / run_len)
    rng = SeededRng(derive_seed(seed, TV_KEY, T), 0)
    starts = rng.gen.integers(0, len(models.corpus) - 32, size=runs).tolist()
    drafter = models.ar if drafter_kind == "ar" else models.denoiser
    out = []
    for r, s in enumerate(starts):
        prompt = models.corpus[s : s + 32]
        cfg = SpecConfig(gamma=gamma, T=T, drafter_kind=drafter_kind, seed=derive_seed(seed, TV_KEY, T, r),
                         max_tokens=min(run_len, tokens - r * run_len), break_acceptance=break_acceptance)
        gen, _ = generate(models.target, drafter, prompt, cfg)
        out.append((prompt, gen))
    return out


def vanilla_samples(models: ModelSet, tokens: int, seed: int, run_len: int = 1024):
    runs = math.ceil(tokens / run_len)
    rng = SeededRng(derive_seed(seed, VANILLA_TV_KEY), 0)
    starts = rng.gen.integers(0, len(models.corpus) - 32, size=runs).tolist()
    out = []
    for r, s in enumerate(starts):
        prompt = models.corpus[s : s + 32]
        gen, _ = vanilla_generate(models.target, prompt, min(run_len, tokens - r * run_len),
                                  seed=derive_seed(seed, VANILLA_TV_KEY, r))
        out.append((prompt, gen))
    return out


def tv_check(models: ModelSet, T: int, tokens: int = 200_000, gamma: int = 10, seed: int = 0, top: int = 20,
             break_acceptance: bool = False, reference=None) -> CheckResult:
    """Largest per-context next-token TV over the ``top`` most frequent one-token contexts.

    The reference law for a context is the target conditional averaged over the
    positions where that context occurred. ``reference`` (vanilla samples), when
    given, adds the two-sample TV to the detail line as a diagnostic.
    """
    samples = spec_samples(models, tokens, T, gamma, seed, break_acceptance=break_acceptance)
    rows = context_tv(samples, models.target, k=1, top=top)
    worst = max(tv for _, _, tv in rows)
    detail = f"(T={T}, gamma={gamma}, {tokens} tokens, top {top} contexts"
    if reference is not None:
        two = max(tv for _, _, tv in empirical_tv(samples, reference, k=1, top=top))
        detail += f", two-sample vs vanilla {two:.4f}"
    return CheckResult(f"mc_tv_T{T}", worst < TV_TOL, worst, TV_TOL, detail + ")")


# gradients


def gradient_check(models: ModelSet | None = None, instances: int = 5, coords: int = 10, seed: int = 0) -> CheckResult:
    """Central differences (h = 1e-5) against the analytic score-entropy gradient.

    Each instance perturbs the parameters away from the trained point and draws
    a fresh corrupted batch; coordinates are drawn among those the batch uses.
    """
    rng = np.random.default_rng(derive_seed(seed, GRAD_KEY))
    if models is None:
        vocab = small_vocab(4)
        stream = rng.integers(0, 4, size=400).tolist()
        den = build_denoiser(stream, vocab, context=4, smoothing_lambda=0.05)
    else:
        den, stream = models.denoiser, models.corpus
    worst = 0.0
    base_w, base_b = den.weights.copy(), den.bias.copy()
    for inst in range(instances):
        batch = sample_training_batch(den, stream, AbsorbingSchedule(20), 8, 24, SeededRng(seed, (GRAD_KEY, inst)))
        w = base_w + rng.normal(0, 0.2, size=base_w.shape)
        b = base_b + rng.normal(0, 0.2, size=base_b.shape)
        _, gw, gb = batch_loss_and_grad(den, batch, w, b)
        used = np.unique(batch.widx[batch.widx >= 0])
        pool = [("w", int(i)) for i in used] + [("b", i) for i in range(b.size)]
        picks = [pool[k] for k in rng.choice(len(pool), size=min(coords, len(pool)), replace=False)]
        for kind, idx in picks:
            wp, wm, bp, bm = w.copy(), w.copy(), b.copy(), b.copy()
            if kind == "w":
                wp.flat[idx] += FD_STEP
                wm.flat[idx] -= FD_STEP
                analytic = gw.flat[idx]
            else:
                bp[idx] += FD_STEP
                bm[idx] -= FD_STEP
                analytic = gb[idx]
            numeric = (batch_loss_and_grad(den, batch, wp, bp)[0] - batch_loss_and_grad(den, batch, wm, bm)[0]) / (2 * FD_STEP)
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
            worst = max(worst, rel)
    return CheckResult("score_entropy_gradient", worst < GRAD_TOL, worst, GRAD_TOL,
                       f"({instances} instances x {coords} coordinates, max relative error)")


def loss_zero_check(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(derive_seed(seed, GRAD_KEY, 1))
    r = np.exp(rng.uniform(math.log(0.01), math.log(100.0), size=1000))
    worst = float(np.abs(score_entropy_term(r, r)).max())
    return CheckResult("score_entropy_zero_at_ratio", worst <= 1e-12, worst, 1e-12, "(1000 ratios in [0.01, 100])")


def run_checks(models: ModelSet | None, quick: bool = False, seed: int = 0, break_acceptance: bool = False,
               tokens: int = 200_000, Ts=(2, 4, 8), gamma: int = 10, report=print) -> list[CheckResult]:
    results = []

    def record(res):
        results.append(res)
        if report is not None:
            report(res.line())

    record(exact_oracle_check(50, seed, break_acceptance))
    if quick:
        return results
    record(alpha_fixture_check(seed=seed))
    if models is not None:
        record(alpha_self_check(models, seed=seed))
    record(loss_zero_check(seed))
    record(gradient_check(models, seed=seed))
    if models is not None:
        for T in Ts:
            record(tv_check(models, T, tokens, gamma, seed, break_acceptance=break_acceptance))
    return results
