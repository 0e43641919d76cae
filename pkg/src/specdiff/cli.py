"""Command line: ``specdiff {train,generate,bench,sweep,verify}``.

Exit codes: 0 success, 1 verification failure (or diverged training),
2 usage/config error, 130 interrupted (rows finished so far stay on disk).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as config_mod
from . import pipeline
from .bench import CsvStream, optimal_gamma, plot_series, run_benchmark, sweep, write_csv, write_plot_data
from .config import ConfigError, RunConfig
from .diffusion import DivergedTraining
from .models import CheckpointError
from .specdec import SpecConfig, generate, vanilla_generate

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERRUPTED = 0, 1, 2, 130

METHODS = {"vanilla": "vanilla", "spec": "ar", "specdiff": None}


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("expected positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="run configuration file (sectioned key = value)")
    shared.add_argument("--seed", type=_u64, help="root seed (overrides [spec] seed)")
    shared.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    shared.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for sweep cells")

    parser = argparse.ArgumentParser(prog="specdiff", description="Diffusion-drafted speculative decoding.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("train", parents=[shared], help="train the target, AR drafter and denoiser")

    gen = sub.add_parser("generate", parents=[shared], help="generate text with one decoding method")
    gen.add_argument("--method", choices=sorted(METHODS), default="specdiff")
    gen.add_argument("--prompt", help="prompt text (default: the first prompt_len corpus tokens)")
    gen.add_argument("--max-tokens", type=_positive_int)
    gen.add_argument("--gamma", type=_positive_int, help="draft length")
    gen.add_argument("--steps", type=_positive_int, help="diffusion steps T")
    gen.add_argument("--temperature", type=float)

    sub.add_parser("bench", parents=[shared], help="vanilla vs classic vs diffusion-drafted decoding")

    sw = sub.add_parser("sweep", parents=[shared], help="(gamma, T) grid for the diffusion drafter")
    sw.add_argument("--gammas", type=_int_list, help="comma-separated gamma values")
    sw.add_argument("--steps", type=_int_list, help="comma-separated T values")

    ver = sub.add_parser("verify", parents=[shared], help="losslessness and gradient self-checks")
    ver.add_argument("--quick", action="store_true", help="exact small-instance oracles only")
    ver.add_argument("--break-acceptance", action="store_true", help="corrupt the acceptance ratio (mutation test)")
    ver.add_argument("--tokens", type=_positive_int, default=200_000, help="tokens per Monte Carlo TV check")
    return parser


def effective_config(args) -> RunConfig:
    cfg = config_mod.load(args.config)
    if args.seed is not None:
        cfg = cfg.replace("spec", seed=args.seed)
    if args.out is not None:
        cfg = cfg.replace("output", dir=str(args.out))
    if args.command == "generate":
        over = {k: v for k, v in (("max_tokens", args.max_tokens), ("temperature", args.temperature),
                                  ("steps", args.steps)) if v is not None}
        if over:
            cfg = cfg.replace("spec", **over)
    if args.command == "sweep":
        over = {k: v for k, v in (("sweep_gammas", args.gammas), ("sweep_steps", args.steps)) if v is not None}
        if over:
            cfg = cfg.replace("bench", **over)
    return config_mod.validate(cfg)


def echo_config(cfg: RunConfig) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / "effective_config.ini"
    path.write_text(config_mod.to_text(cfg), encoding="utf-8")
    return path


# commands


def cmd_train(cfg: RunConfig, args) -> int:
    models, schedule, summary = pipeline.train_models(cfg)
    paths = pipeline.save_models(models, schedule, cfg.out_dir)
    for line in summary.lines():
        print(line)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _prompt_ids(cfg: RunConfig, models, text):
    if text is None:
        return list(models.corpus[: cfg.bench.prompt_len])
    try:
        ids = models.vocab.encode(text)
    except ValueError as exc:
        raise UsageError(f"prompt: {exc}") from None
    if not ids:
        raise UsageError("prompt is empty")
    return ids


def stats_line(stats, max_tokens: int, cost) -> str:
    sim = max_tokens * cost.target_call_cost / stats.price(cost)
    alpha = f"{stats.alpha_hat:.4f}" if stats.drafts else "n/a"
    apd = f"{stats.accepted_per_draft:.3f}" if stats.drafts else "n/a"
    return (f"tokens={stats.emitted_total} drafts={stats.drafts} alpha_hat={alpha} accepted_per_draft={apd} "
            f"target_calls={stats.target_calls} drafter_steps={stats.drafter_steps} sim_speedup={sim:.3f}")


def cmd_generate(cfg: RunConfig, args) -> int:
    models = pipeline.load_models(cfg)
    cost = pipeline.cost_from(cfg)
    prompt = _prompt_ids(cfg, models, args.prompt)
    sp = cfg.spec
    if args.method == "vanilla":
        out, stats = vanilla_generate(models.target, prompt, sp.max_tokens, sp.temperature, seed=sp.seed, cost=cost)
    else:
        if args.method == "spec":
            kind, drafter, gamma = "ar", models.ar, args.gamma or sp.ar_gamma
        else:
            kind = sp.drafter if sp.drafter != "ar" else "diffusion-multistep"
            drafter, gamma = models.denoiser, args.gamma or sp.gamma
        scfg = SpecConfig(gamma=gamma, T=sp.steps, temperature=sp.temperature, drafter_kind=kind, seed=sp.seed,
                          max_tokens=sp.max_tokens)
        out, stats = generate(models.target, drafter, prompt, scfg, cost)
    print(models.vocab.decode(out))
    print(stats_line(stats, sp.max_tokens, cost))
    return EXIT_OK


def _table(rows) -> str:
    head = f"{'drafter':<22}{'gamma':>6}{'T':>4}{'alpha_hat':>11}{'acc/draft':>11}{'sim_speedup':>13}{'+/-':>8}"
    lines = [head, "-" * len(head)]
    for r in rows:
        alpha = "" if r.drafter == "vanilla" else f"{r.alpha_hat:.4f}"
        apd = "" if r.drafter == "vanilla" else f"{r.accepted_per_draft:.3f}"
        lines.append(f"{r.drafter:<22}{r.gamma:>6}{r.T:>4}{alpha:>11}{apd:>11}{r.sim_speedup:>13.3f}{r.speedup_se:>8.3f}")
    return "\n".join(lines)


def cmd_bench(cfg: RunConfig, args) -> int:
    from .plotting import render_bench

    models = pipeline.load_models(cfg)
    report = run_benchmark(pipeline.scenario_from(cfg), models, pipeline.cost_from(cfg))
    csv_path = cfg.out_dir / "bench.csv"
    write_csv(csv_path, report.rows)
    xs = list(range(len(report.rows)))
    names = " ".join(f"{i}={r.drafter}" for i, r in zip(xs, report.rows))
    write_plot_data(cfg.out_dir / "bench_speedup.dat", xs, [r.sim_speedup for r in report.rows],
                    [r.sim_speedup - 1.96 * r.speedup_se for r in report.rows],
                    [r.sim_speedup + 1.96 * r.speedup_se for r in report.rows], f"simulated speedup; {names}")
    png = render_bench(report.rows, cfg.out_dir)
    print(_table(report.rows))
    print(f"wrote {csv_path}")
    print(f"wrote {png}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    from .plotting import render_figures

    models = pipeline.load_models(cfg)
    out = cfg.out_dir
    grid_csv, base_csv = CsvStream(out / "sweep.csv"), CsvStream(out / "sweep_baselines.csv")

    def route(row):
        (grid_csv if row.drafter.startswith("diffusion") else base_csv)(row)

    report = sweep(cfg.bench.sweep_gammas, cfg.bench.sweep_steps, pipeline.scenario_from(cfg), models,
                   pipeline.cost_from(cfg), jobs=args.jobs, on_row=route)
    plot_dir = out / "plots"
    plot_dir.mkdir(parents=True, exist_ok=True)
    series = plot_series(report)
    for name, (xs, ys, lo, hi, comment) in series.items():
        write_plot_data(plot_dir / f"{name}.dat", xs, ys, lo, hi, comment)
    baselines = {}
    try:
        ar = report.find("ar")
        baselines[f"classic gamma={ar.gamma}"] = ar.sim_speedup
    except KeyError:
        pass
    pngs = render_figures(series, plot_dir, baselines)
    g_best, t_best = report.speed_optimal
    g_acc, t_acc = report.accepted_optimal
    summary = [
        _table(report.rows),
        f"speed-optimal cell: gamma={g_best} T={t_best}",
        f"accepted-tokens-optimal cell: gamma={g_acc} T={t_acc}",
        f"optimal gamma (one-standard-error rule): {optimal_gamma(report)}",
    ]
    text = "\n".join(summary)
    (out / "sweep_summary.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    print(f"wrote {grid_csv.path}, {base_csv.path}, {len(series)} plot-data files and {len(pngs)} figures")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    from .verification import run_checks

    models = None if args.quick else pipeline.load_models(cfg)
    results = run_checks(models, quick=args.quick, seed=cfg.spec.seed, break_acceptance=args.break_acceptance,
                         tokens=args.tokens)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("verification FAILED: " + ", ".join(failed))
        return EXIT_FAIL
    print(f"verification passed ({len(results)} checks)")
    return EXIT_OK


COMMANDS = {"train": cmd_train, "generate": cmd_generate, "bench": cmd_bench, "sweep": cmd_sweep,
            "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        echo_config(cfg)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, UsageError, pipeline.MissingCheckpoint, pipeline.CorpusUnreadable, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergedTraining as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except KeyboardInterrupt:
        print("interrupted; rows finished so far were written", file=sys.stderr)
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
