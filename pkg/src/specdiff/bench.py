"""Measurement harness: exact losslessness oracle, acceptance-rate estimates,
simulated speedups and (gamma, T) sweeps.

Speedups are computed with a :class:`CostModel` rather than wall-clock time;
wall-clock ratios are recorded next to them for reference only.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SeededRng, Vocab, derive_seed, overlap, residual_distribution, temperature_scale
from .diffusion import Denoiser
from .models import ArDrafter, ContextModel, next_distribution, parallel_score
from .specdec import CostModel, RunStats, SpecConfig, generate, make_draft, vanilla_generate, verify

__all__ = [
    "CostModel", "InstanceTooLarge", "MissingModel", "ModelSet", "Scenario", "BenchRow", "BenchReport",
    "exact_step_oracle", "target_chain_law", "completed_block_law", "measure_alpha", "run_benchmark",
    "sweep", "short_sequence_scenario", "optimal_gamma", "context_tv", "write_csv", "write_plot_data",
]

CSV_HEADER = ("scenario,target,drafter,gamma,T,alpha_hat,accepted_per_draft,target_calls,"
              "drafter_steps,sim_speedup,wall_speedup,seed,trials")

ORACLE_MAX_GAMMA = 3
ORACLE_MAX_VOCAB = 6

PROMPT_STREAM = 5
VANILLA_KEY, CLASSIC_KEY, SPECDIFF_KEY, SWEEP_KEY = 3, 6, 7, 10


class InstanceTooLarge(ValueError):
    pass


class MissingModel(ValueError):
    pass


# exact oracle


def exact_step_oracle(target: ContextModel, proposals, prefix, gamma: int, break_acceptance: bool = False):
    """Exact law of the block emitted by one speculative step with a factorized drafter.

    Every draft assignment is enumerated with probability prod_j q_j(x_j); the
    acceptance scan is integrated in closed form (accept with min(1, p/q),
    otherwise route the rejected mass through the residual). Returns
    ``(block_law, accepted_law)``: {emitted tuple: prob} and {accepted count: prob}.

    ``break_acceptance`` applies the same sqrt corruption as the engine's test hook.
    """
    n_emit = int(target.vocab.emittable.sum())
    if gamma > ORACLE_MAX_GAMMA or n_emit > ORACLE_MAX_VOCAB:
        raise InstanceTooLarge(f"oracle supports gamma <= {ORACLE_MAX_GAMMA} and <= {ORACLE_MAX_VOCAB} tokens")
    if gamma < 1 or len(proposals) != gamma:
        raise ValueError("need exactly gamma >= 1 proposal distributions")
    prefix = list(prefix)
    support = [np.flatnonzero(np.asarray(q) > 0).tolist() for q in proposals]
    block_law: dict[tuple[int, ...], float] = {}
    accepted_law: dict[int, float] = {}

    def emit(block, mass, n_acc):
        block_law[block] = block_law.get(block, 0.0) + mass
        accepted_law[n_acc] = accepted_law.get(n_acc, 0.0) + mass

    for draft in itertools.product(*support):
        mass = math.prod(float(proposals[j][x]) for j, x in enumerate(draft))
        seq = list(prefix)
        for j, x in enumerate(draft):
            p = next_distribution(target, seq)
            q = proposals[j]
            ratio = p[x] / q[x]
            if break_acceptance:
                ratio = math.sqrt(ratio)
            acc = min(1.0, ratio)
            if acc < 1.0:
                res = residual_distribution(p, q)
                for y in np.flatnonzero(res > 0).tolist():
                    emit(tuple(draft[:j]) + (y,), mass * (1.0 - acc) * float(res[y]), j)
            mass *= acc
            if mass == 0.0:
                break
            seq.append(x)
        else:
            p = next_distribution(target, seq)
            for y in np.flatnonzero(p > 0).tolist():
                emit(tuple(draft) + (y,), mass * float(p[y]), gamma)
    return block_law, accepted_law


def target_chain_law(target: ContextModel, prefix, length: int) -> dict[tuple[int, ...], float]:
    """Exact law of ``length`` tokens sampled from the target one at a time."""
    law = {(): 1.0}
    for _ in range(length):
        nxt = {}
        for seq, mass in law.items():
            p = next_distribution(target, list(prefix) + list(seq))
            for y in np.flatnonzero(p > 0).tolist():
                nxt[seq + (y,)] = mass * float(p[y])
        law = nxt
    return law


def completed_block_law(target: ContextModel, prefix, block_law, length: int) -> dict[tuple[int, ...], float]:
    """Extend every emitted block with target samples up to ``length`` tokens.

    The step is lossless exactly when this equals :func:`target_chain_law`.
    """
    out: dict[tuple[int, ...], float] = {}
    for block, mass in block_law.items():
        for tail, m in target_chain_law(target, list(prefix) + list(block), length - len(block)).items():
            key = block + tail
            out[key] = out.get(key, 0.0) + mass * m
    return out


def max_law_gap(a: dict, b: dict) -> float:
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b))


# acceptance rate


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: float
    ci_low: float
    ci_high: float
    tested: int
    accepted: int
    analytic: float  # mean of overlap(p_j, q_j) over the tested positions

    def brackets(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


def binomial_ci(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Normal-approximation interval, clipped to [0, 1]."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    half = z * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)


def measure_alpha(target: ContextModel, drafter, prefixes, trials: int, cfg: SpecConfig) -> AlphaEstimate:
    """Per-position acceptance rate over ``trials`` independent speculative steps.

    Each trial drafts from one prefix (cycled), verifies once, and counts the
    positions the scan actually tested. The analytic reference is the mean of
    overlap(p_j, q_j) over the same tested positions.
    """
    if trials < 1000:
        raise ValueError("measure_alpha needs at least 1000 trials")
    prefixes = [list(p) for p in prefixes]
    if not prefixes:
        raise ValueError("need at least one prefix")
    draft_rng = SeededRng(cfg.seed, 1)
    verify_rng = SeededRng(cfg.seed, 2)
    tested = accepted = 0
    analytic = 0.0
    for trial in range(trials):
        prefix = prefixes[trial % len(prefixes)]
        draft = make_draft(drafter, prefix, cfg, draft_rng)
        dists = parallel_score(target, prefix, draft.tokens)
        if cfg.temperature != 1.0:
            dists = [temperature_scale(p, cfg.temperature) for p in dists]
        out = verify(draft, dists, verify_rng, cfg.break_acceptance)
        tested += out.tested
        accepted += out.accepted
        analytic += sum(overlap(dists[j], draft.proposals[j]) for j in range(out.tested))
    lo, hi = binomial_ci(accepted, tested)
    return AlphaEstimate(accepted / tested, lo, hi, tested, accepted, analytic / tested)


# benchmark rows


@dataclass
class ModelSet:
    """Everything a benchmark needs: trained models plus the text prompts are cut from."""

    vocab: Vocab
    corpus: list[int]
    target: ContextModel
    ar: ArDrafter | None = None
    denoiser: Denoiser | None = None

    @property
    def target_id(self) -> str:
        return f"ctx{self.target.order}"


@dataclass(frozen=True)
class Scenario:
    name: str = "long"
    max_tokens: int = 1024
    trials: int = 32
    prompt_len: int = 32
    seed: int = 0
    ar_gamma: int = 5
    gamma: int = 40
    T: int = 4
    temperature: float = 1.0
    drafter_kind: str = "diffusion-multistep"

    def prompts(self, corpus) -> list[list[int]]:
        corpus = list(corpus)
        if len(corpus) <= self.prompt_len:
            raise ValueError("corpus shorter than one prompt")
        rng = SeededRng(self.seed, PROMPT_STREAM)
        starts = rng.gen.integers(0, len(corpus) - self.prompt_len, size=self.trials)
        return [corpus[s : s + self.prompt_len] for s in starts.tolist()]


@dataclass
class BenchRow:
    scenario: str
    target: str
    drafter: str
    gamma: int
    T: int
    alpha_hat: float
    accepted_per_draft: float
    target_calls: int
    drafter_steps: int
    sim_speedup: float
    wall_speedup: float
    seed: int
    trials: int
    # not part of the CSV
    alpha_se: float = field(default=0.0, compare=False)
    speedup_se: float = field(default=0.0, compare=False)
    tested_alpha: float = field(default=float("nan"), compare=False)
    wall_ns: int = field(default=0, compare=False)
    sim_cost: float = field(default=0.0, compare=False)
    trial_costs: tuple = field(default=(), compare=False, repr=False)

    def csv_values(self) -> list[str]:
        return [
            self.scenario, self.target, self.drafter, str(self.gamma), str(self.T),
            f"{self.alpha_hat:.6f}", f"{self.accepted_per_draft:.6f}", str(self.target_calls),
            str(self.drafter_steps), f"{self.sim_speedup:.6f}", f"{self.wall_speedup:.6f}",
            str(self.seed), str(self.trials),
        ]


@dataclass
class BenchReport:
    rows: list[BenchRow]
    speed_optimal: tuple[int, int] | None = None      # (gamma, T) of the diffusion cell
    accepted_optimal: tuple[int, int] | None = None

    def find(self, drafter: str, gamma: int | None = None, T: int | None = None) -> BenchRow:
        for r in self.rows:
            if r.drafter == drafter and (gamma is None or r.gamma == gamma) and (T is None or r.T == T):
                return r
        raise KeyError((drafter, gamma, T))

    def cells(self) -> list[BenchRow]:
        return [r for r in self.rows if r.drafter.startswith("diffusion")]


def _ratio_se(num: np.ndarray, den: np.ndarray) -> float:
    """Cluster-robust standard error of sum(num) / sum(den) over trials."""
    n = num.size
    if n < 2 or den.sum() == 0:
        return float("nan")
    r = num.sum() / den.sum()
    resid = num - r * den
    return float(math.sqrt((resid ** 2).sum() * n / (n - 1)) / den.sum())


def _summarize(scenario: Scenario, models: ModelSet, drafter: str, gamma: int, T: int,
               stats: list[RunStats], cost: CostModel, vanilla_wall_ns: int) -> BenchRow:
    acc = np.array([s.accepted_total for s in stats], dtype=np.float64)
    drafts = np.array([s.drafts for s in stats], dtype=np.float64)
    tested = np.array([s.tested_total for s in stats], dtype=np.float64)
    costs = np.array([s.price(cost) for s in stats])
    wall = sum(s.wall_ns for s in stats)
    vanilla_cost = scenario.max_tokens * cost.target_call_cost
    speedup = vanilla_cost * len(stats) / costs.sum()
    # cost-per-trial scatter maps onto the speedup by the delta method
    cost_se = costs.std(ddof=1) / math.sqrt(costs.size) if costs.size > 1 else float("nan")
    if drafter == "vanilla":
        alpha = apd = tested_alpha = float("nan")
        alpha_se = float("nan")
    else:
        alpha = acc.sum() / (gamma * drafts.sum())
        apd = acc.sum() / drafts.sum()
        alpha_se = _ratio_se(acc, gamma * drafts)
        tested_alpha = acc.sum() / tested.sum()
    return BenchRow(
        scenario=scenario.name, target=models.target_id, drafter=drafter, gamma=gamma, T=T,
        alpha_hat=float(alpha), accepted_per_draft=float(apd),
        target_calls=int(sum(s.target_calls for s in stats)),
        drafter_steps=int(sum(s.drafter_steps for s in stats)),
        sim_speedup=float(speedup), wall_speedup=float(vanilla_wall_ns / wall) if wall else float("nan"),
        seed=scenario.seed, trials=len(stats), alpha_se=alpha_se,
        speedup_se=float(speedup * cost_se / costs.mean()), tested_alpha=float(tested_alpha),
        wall_ns=int(wall), sim_cost=float(costs.sum()), trial_costs=tuple(costs.tolist()),
    )


def speedup_difference(a: BenchRow, b: BenchRow) -> tuple[float, float]:
    """sim_speedup(a) - sim_speedup(b) and its standard error, paired over trials.

    Rows from one scenario share prompts trial by trial, so prompt-to-prompt
    cost variation cancels in the difference; the delta method is applied to
    the per-trial costs of both rows jointly.
    """
    ca, cb = np.asarray(a.trial_costs), np.asarray(b.trial_costs)
    if ca.size != cb.size or ca.size < 2:
        raise ValueError("paired difference needs two rows with the same trials (at least 2)")
    u = a.sim_speedup * ca / ca.mean() - b.sim_speedup * cb / cb.mean()
    return a.sim_speedup - b.sim_speedup, float(u.std(ddof=1) / math.sqrt(u.size))


def _vanilla_stats(models: ModelSet, scenario: Scenario, prompts, cost: CostModel) -> list[RunStats]:
    out = []
    for trial, prompt in enumerate(prompts):
        seed = derive_seed(scenario.seed, VANILLA_KEY, trial)
        _, st = vanilla_generate(models.target, prompt, scenario.max_tokens, scenario.temperature, seed=seed, cost=cost)
        out.append(st)
    return out


def _spec_stats(models: ModelSet, scenario: Scenario, prompts, kind: str, gamma: int, T: int,
                key: tuple[int, ...], cost: CostModel) -> list[RunStats]:
    drafter = models.ar if kind == "ar" else models.denoiser
    if drafter is None:
        raise MissingModel(f"no trained model for drafter kind {kind!r}")
    out = []
    for trial, prompt in enumerate(prompts):
        cfg = SpecConfig(gamma=gamma, T=T, temperature=scenario.temperature, drafter_kind=kind,
                         seed=derive_seed(scenario.seed, *key, trial), max_tokens=scenario.max_tokens)
        _, st = generate(models.target, drafter, prompt, cfg, cost)
        out.append(st)
    return out


def run_benchmark(scenario: Scenario, models: ModelSet | None, cost: CostModel | None = None) -> BenchReport:
    """Vanilla, classic (AR drafter) and diffusion-drafted decoding over the same prompts and budget."""
    if models is None or models.target is None:
        raise MissingModel("run_benchmark needs a trained target model")
    if models.ar is None or models.denoiser is None:
        raise MissingModel("run_benchmark needs both the AR drafter and the denoiser")
    cost = cost or CostModel()
    prompts = scenario.prompts(models.corpus)
    van = _vanilla_stats(models, scenario, prompts, cost)
    v_wall = sum(s.wall_ns for s in van)
    rows = [_summarize(scenario, models, "vanilla", 0, 0, van, cost, v_wall)]
    ar = _spec_stats(models, scenario, prompts, "ar", scenario.ar_gamma, 1, (CLASSIC_KEY,), cost)
    rows.append(_summarize(scenario, models, "ar", scenario.ar_gamma, 0, ar, cost, v_wall))
    sd = _spec_stats(models, scenario, prompts, scenario.drafter_kind, scenario.gamma, scenario.T, (SPECDIFF_KEY,), cost)
    steps_T = scenario.T if scenario.drafter_kind == "diffusion-multistep" else 1
    rows.append(_summarize(scenario, models, scenario.drafter_kind, scenario.gamma, steps_T, sd, cost, v_wall))
    return BenchReport(rows)


# sweeps


def _sweep_cell(args):
    models, scenario, gamma, T, cost, v_wall = args
    prompts = scenario.prompts(models.corpus)
    stats = _spec_stats(models, scenario, prompts, scenario.drafter_kind, gamma, T, (SWEEP_KEY, gamma, T), cost)
    return _summarize(scenario, models, scenario.drafter_kind, gamma, T, stats, cost, v_wall)


def sweep(gammas, Ts, scenario: Scenario, models: ModelSet, cost: CostModel | None = None, jobs: int = 1,
          on_row=None, include_baselines: bool = True) -> BenchReport:
    """Full factorial (gamma, T) grid for the diffusion drafter.

    Each cell draws its trial seeds from (root seed, gamma, T), so a cell's row
    does not depend on the rest of the grid or on ``jobs``. ``on_row`` sees
    every row as soon as it is final (baselines first, then cells in grid order).
    """
    gammas, Ts = list(gammas), list(Ts)
    if not gammas or not Ts:
        raise ValueError("sweep ranges must be non-empty")
    if models.denoiser is None:
        raise MissingModel("sweep needs a trained denoiser")
    cost = cost or CostModel()
    prompts = scenario.prompts(models.corpus)
    van = _vanilla_stats(models, scenario, prompts, cost)
    v_wall = sum(s.wall_ns for s in van)
    rows: list[BenchRow] = []

    def push(row):
        rows.append(row)
        if on_row is not None:
            on_row(row)

    if include_baselines:
        push(_summarize(scenario, models, "vanilla", 0, 0, van, cost, v_wall))
        if models.ar is not None:
            ar = _spec_stats(models, scenario, prompts, "ar", scenario.ar_gamma, 1, (CLASSIC_KEY,), cost)
            push(_summarize(scenario, models, "ar", scenario.ar_gamma, 0, ar, cost, v_wall))
    grid = [(models, scenario, g, t, cost, v_wall) for g in gammas for t in Ts]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for row in pool.map(_sweep_cell, grid):
                push(row)
    else:
        for cell in grid:
            push(_sweep_cell(cell))
    report = BenchReport(rows)
    cells = report.cells()
    best = max(cells, key=lambda r: r.sim_speedup)
    most = max(cells, key=lambda r: r.accepted_per_draft)
    report.speed_optimal = (best.gamma, best.T)
    report.accepted_optimal = (most.gamma, most.T)
    return report


def optimal_gamma(report: BenchReport) -> int:
    """Smallest gamma whose best cell is within one standard error of the overall best.

    Plain argmax over a flat speedup curve is decided by noise; this is the usual
    one-standard-error rule for picking the cheapest near-optimal setting.
    """
    cells = report.cells()
    best = max(cells, key=lambda r: r.sim_speedup)
    bar = best.sim_speedup - best.speedup_se
    return min(r.gamma for r in cells if r.sim_speedup >= bar)


@dataclass
class ShortScenarioResult:
    report: BenchReport
    optimal_gamma: int
    classic_speedup: float
    best_speedup: float

    @property
    def margin(self) -> float:
        """SpecDiff / classic speculative speedup ratio at the sweep-optimal cell."""
        return self.best_speedup / self.classic_speedup


def short_sequence_scenario(models: ModelSet, scenario: Scenario, gammas, Ts, cost: CostModel | None = None,
                            jobs: int = 1) -> ShortScenarioResult:
    """The sweep pipeline with a small generation budget (at most 100 tokens)."""
    if scenario.max_tokens > 100:
        raise ValueError("the short-sequence scenario is limited to max_tokens <= 100")
    return scenario_summary(sweep(gammas, Ts, scenario, models, cost, jobs))


def scenario_summary(report: BenchReport) -> ShortScenarioResult:
    classic = report.find("ar")
    best = max(report.cells(), key=lambda r: r.sim_speedup)
    return ShortScenarioResult(report, optimal_gamma(report), classic.sim_speedup, best.sim_speedup)


# losslessness statistics


def context_tv(samples, target: ContextModel, k: int = 1, top: int = 20):
    """Per-context next-token TV between generated tokens and the target's own law.

    ``samples`` is a list of (prompt, generated tokens). For each of the ``top``
    most frequent length-``k`` contexts among the generated positions, the
    empirical next-token frequencies are compared with the target conditional
    averaged over exactly those positions, i.e. the expected frequencies of a
    vanilla sampler visiting the same prefixes. Returns [(context, count, tv)].
    """
    V = len(target.vocab)
    counts: dict[tuple[int, ...], np.ndarray] = {}
    expected: dict[tuple[int, ...], np.ndarray] = {}
    for prompt, out in samples:
        seq = list(prompt) + list(out)
        for i in range(len(prompt), len(seq)):
            if i < k:
                continue
            ctx = tuple(seq[i - k : i])
            if ctx not in counts:
                counts[ctx] = np.zeros(V)
                expected[ctx] = np.zeros(V)
            counts[ctx][seq[i]] += 1
            expected[ctx] += next_distribution(target, seq[:i])
    ranked = sorted(counts, key=lambda c: (-counts[c].sum(), c))[:top]
    out = []
    for ctx in ranked:
        n = counts[ctx].sum()
        out.append((ctx, int(n), float(0.5 * np.abs(counts[ctx] / n - expected[ctx] / n).sum())))
    return out


def empirical_tv(samples_a, samples_b, k: int = 1, top: int = 20):
    """Two-sample per-context TV (diagnostic; its noise floor is far above that of :func:`context_tv`)."""
    def table(samples):
        t: dict[tuple[int, ...], dict[int, int]] = {}
        for prompt, out in samples:
            seq = list(prompt) + list(out)
            for i in range(max(len(prompt), k), len(seq)):
                row = t.setdefault(tuple(seq[i - k : i]), {})
                row[seq[i]] = row.get(seq[i], 0) + 1
        return t
    ta, tb = table(samples_a), table(samples_b)
    ranked = sorted(ta, key=lambda c: (-sum(ta[c].values()), c))[:top]
    out = []
    for ctx in ranked:
        a, b = ta[ctx], tb.get(ctx, {})
        na, nb = sum(a.values()), max(1, sum(b.values()))
        tv = 0.5 * sum(abs(a.get(x, 0) / na - b.get(x, 0) / nb) for x in set(a) | set(b))
        out.append((ctx, na, tv))
    return out


# output files


def write_csv(path, rows, append: bool = False) -> None:
    path = Path(path)
    fresh = not append or not path.exists()
    with path.open("w" if fresh else "a", newline="", encoding="utf-8") as fh:
        if fresh:
            fh.write(CSV_HEADER + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for row in rows:
            writer.writerow(row.csv_values())


class CsvStream:
    """Writes the header at once and every row as it arrives, so an interrupted grid keeps its rows."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.write_text(CSV_HEADER + "\n", encoding="utf-8")

    def __call__(self, row: BenchRow) -> None:
        with self.path.open("a", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerow(row.csv_values())


def write_plot_data(path, xs, ys, lo, hi, comment: str = "") -> None:
    lines = [f"# {comment}"] if comment else []
    lines.append("x y ci_low ci_high")
    for x, y, a, b in zip(xs, ys, lo, hi):
        lines.append(f"{x:g} {y:.6f} {a:.6f} {b:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def plot_series(report: BenchReport):
    """Named (x, y, ci_low, ci_high, comment) series derived from a sweep report."""
    cells = report.cells()
    gammas = sorted({r.gamma for r in cells})
    Ts = sorted({r.T for r in cells})
    z = 1.96
    series = {}
    for g in gammas:
        rs = [report.find(cells[0].drafter, g, t) for t in Ts]
        series[f"speedup_vs_T_gamma{g}"] = (
            Ts, [r.sim_speedup for r in rs], [r.sim_speedup - z * r.speedup_se for r in rs],
            [r.sim_speedup + z * r.speedup_se for r in rs], f"simulated speedup vs diffusion steps, gamma={g}")
        series[f"alpha_vs_T_gamma{g}"] = (
            Ts, [r.alpha_hat for r in rs], [r.alpha_hat - z * r.alpha_se for r in rs],
            [r.alpha_hat + z * r.alpha_se for r in rs], f"alpha_hat vs diffusion steps, gamma={g}")
    for t in Ts:
        rs = [report.find(cells[0].drafter, g, t) for g in gammas]
        series[f"speedup_vs_gamma_T{t}"] = (
            gammas, [r.sim_speedup for r in rs], [r.sim_speedup - z * r.speedup_se for r in rs],
            [r.sim_speedup + z * r.speedup_se for r in rs], f"simulated speedup vs gamma, T={t}")
        apd_se = [r.alpha_se * r.gamma for r in rs]
        series[f"accepted_per_draft_vs_gamma_T{t}"] = (
            gammas, [r.accepted_per_draft for r in rs],
            [r.accepted_per_draft - z * s for r, s in zip(rs, apd_se)],
            [r.accepted_per_draft + z * s for r, s in zip(rs, apd_se)],
            f"accepted tokens per draft (raw counters) vs gamma, T={t}")
        prod = [r.tested_alpha * r.gamma for r in rs]
        series[f"alpha_times_gamma_vs_gamma_T{t}"] = (
            gammas, prod, prod, prod, f"per-tested-position alpha times gamma vs gamma, T={t} (no interval)")
    return series
