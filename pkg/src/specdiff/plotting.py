"""PNG figures for sweep reports (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 110,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
}

# (figure file stem, series prefix, x label, y label, log-x)
FIGURES = (
    ("speedup_vs_T", "speedup_vs_T_gamma", "diffusion steps T", "simulated speedup", True),
    ("alpha_vs_T", "alpha_vs_T_gamma", "diffusion steps T", "alpha_hat", True),
    ("speedup_vs_gamma", "speedup_vs_gamma_T", "gamma", "simulated speedup", False),
    ("accepted_per_draft_vs_gamma", "accepted_per_draft_vs_gamma_T", "gamma", "accepted tokens per draft", False),
)


def _label(prefix: str, name: str) -> str:
    key = name[len(prefix):]
    return f"gamma={key}" if prefix.endswith("gamma") else f"T={key}"


def render_figures(series: dict, out_dir, baselines: dict | None = None) -> list[Path]:
    """One PNG per figure family; each line carries its 95% band.

    ``baselines`` maps a label to a flat speedup drawn as a dashed reference
    on the speedup figures (e.g. the classic drafter).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with plt.rc_context(STYLE):
        for stem, prefix, xlabel, ylabel, logx in FIGURES:
            names = sorted((n for n in series if n.startswith(prefix)), key=lambda n: int(n[len(prefix):]))
            if not names:
                continue
            fig, ax = plt.subplots()
            for name in names:
                xs, ys, lo, hi, _ = series[name]
                line, = ax.plot(xs, ys, marker="o", label=_label(prefix, name))
                ax.fill_between(xs, lo, hi, color=line.get_color(), alpha=0.15, linewidth=0)
            if stem == "accepted_per_draft_vs_gamma":
                for name in names:
                    prod = series.get("alpha_times_gamma_vs_gamma_T" + name[len(prefix):])
                    if prod is not None:
                        ax.plot(prod[0], prod[1], linestyle=":", color="grey", linewidth=0.9)
            if stem.startswith("speedup") and baselines:
                for label, value in baselines.items():
                    ax.axhline(value, linestyle="--", color="black", linewidth=0.9, label=label)
            if logx:
                ax.set_xscale("log", base=2)
            ax.set_xlabel(xlabel)
            ax.set_ylabel(ylabel)
            ax.grid(alpha=0.3)
            ax.legend(frameon=False, ncol=2)
            fig.tight_layout()
            path = out_dir / f"{stem}.png"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)
    return written


def render_bench(rows, out_dir) -> Path:
    """Bar chart of simulated speedup per decoding method, with 95% error bars."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = [r.drafter if r.drafter == "vanilla" else f"{r.drafter}\ngamma={r.gamma}" for r in rows]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.bar(range(len(rows)), [r.sim_speedup for r in rows], yerr=[1.96 * r.speedup_se for r in rows],
               color="#4c72b0", capsize=3)
        ax.set_xticks(range(len(rows)), labels)
        ax.set_ylabel("simulated speedup")
        ax.grid(axis="y", alpha=0.3)
        fig.tight_layout()
        path = out_dir / "bench_speedup.png"
        fig.savefig(path)
        plt.close(fig)
    return path
