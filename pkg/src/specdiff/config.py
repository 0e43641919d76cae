"""Run configuration: a sectioned key=value file with a documented default for every key.

Example (every key optional)::

    [data]
    corpus = bundled:long        # bundled:long, bundled:short, or a text file path
    vocab_mode = byte            # byte | whitespace

    [target]
    order = 12
    lambda = 1e-6

    [ar_drafter]
    order = 12
    lambda = 0.05

    [denoiser]
    context = 12
    lambda = 0.05
    right_context = false
    step_buckets = 4
    train_steps = 20             # schedule length used to sample training noise levels
    epochs = 200
    learning_rate = 0.5
    windows = 300
    block = 48

    [spec]
    drafter = diffusion-multistep
    gamma = 40
    steps = 4
    ar_gamma = 5
    temperature = 1.0
    max_tokens = 1024
    seed = 0

    [bench]
    scenario = long
    trials = 64
    prompt_len = 32
    target_call_cost = 1.0
    ar_step_cost = 0.06
    diff_step_cost = 0.06
    sweep_gammas = 10,20,30,40,50
    sweep_steps = 1,2,4,8,16

    [output]
    dir = runs/default
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .specdec import DRAFTER_KINDS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DataConfig:
    corpus: str = "bundled:long"
    vocab_mode: str = "byte"


@dataclass(frozen=True)
class TargetConfig:
    order: int = 12
    smoothing_lambda: float = 1e-6


@dataclass(frozen=True)
class ArDrafterConfig:
    order: int = 12
    smoothing_lambda: float = 0.05


@dataclass(frozen=True)
class DenoiserConfig:
    context: int = 12
    smoothing_lambda: float = 0.05
    right_context: bool = False
    step_buckets: int = 4
    train_steps: int = 20
    epochs: int = 200
    learning_rate: float = 0.5
    windows: int = 300
    block: int = 48


@dataclass(frozen=True)
class SpecSection:
    drafter: str = "diffusion-multistep"
    gamma: int = 40
    steps: int = 4
    ar_gamma: int = 5
    temperature: float = 1.0
    max_tokens: int = 1024
    seed: int = 0


@dataclass(frozen=True)
class BenchSection:
    scenario: str = "long"
    trials: int = 64
    prompt_len: int = 32
    target_call_cost: float = 1.0
    ar_step_cost: float = 0.06
    diff_step_cost: float = 0.06
    sweep_gammas: tuple[int, ...] = (10, 20, 30, 40, 50)
    sweep_steps: tuple[int, ...] = (1, 2, 4, 8, 16)


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "runs/default"


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    target: TargetConfig = field(default_factory=TargetConfig)
    ar_drafter: ArDrafterConfig = field(default_factory=ArDrafterConfig)
    denoiser: DenoiserConfig = field(default_factory=DenoiserConfig)
    spec: SpecSection = field(default_factory=SpecSection)
    bench: BenchSection = field(default_factory=BenchSection)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def out_dir(self) -> Path:
        return Path(self.output.dir)

    def replace(self, section: str, **values) -> "RunConfig":
        return dataclasses.replace(self, **{section: dataclasses.replace(getattr(self, section), **values)})


# file keys that differ from the dataclass field names
_ALIASES = {"lambda": "smoothing_lambda"}
_REVERSE = {v: k for k, v in _ALIASES.items()}


def _coerce(kind, raw: str, where: str):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == tuple[int, ...]:
            items = tuple(int(x) for x in raw.replace(" ", "").split(",") if x)
            if not items:
                raise ValueError(raw)
            return items
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r}") from None


def _field_types(section_cls) -> dict:
    hints = {f.name: f.type for f in dataclasses.fields(section_cls)}
    resolved = {}
    for name, hint in hints.items():
        resolved[name] = {"int": int, "float": float, "bool": bool, "str": str,
                          "tuple[int, ...]": tuple[int, ...]}[hint] if isinstance(hint, str) else hint
    return resolved


def from_text(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cfg = RunConfig()
    sections = {f.name: f for f in dataclasses.fields(RunConfig)}
    for name in parser.sections():
        if name not in sections:
            raise ConfigError(f"{source}: unknown section [{name}]")
        current = getattr(cfg, name)
        types = _field_types(type(current))
        values = {}
        for key, raw in parser.items(name):
            attr = _ALIASES.get(key, key)
            if attr not in types:
                raise ConfigError(f"{source}: unknown key {key!r} in [{name}]")
            values[attr] = _coerce(types[attr], raw, f"{source} [{name}] {key}")
        cfg = cfg.replace(name, **values)
    return cfg


def to_text(cfg: RunConfig) -> str:
    lines = []
    for sec in dataclasses.fields(RunConfig):
        lines.append(f"[{sec.name}]")
        for f in dataclasses.fields(getattr(cfg, sec.name)):
            value = getattr(getattr(cfg, sec.name), f.name)
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, tuple):
                value = ",".join(map(str, value))
            lines.append(f"{_REVERSE.get(f.name, f.name)} = {value}")
        lines.append("")
    return "\n".join(lines)


def validate(cfg: RunConfig) -> RunConfig:
    """Checks that need the whole config; also enforces that referenced paths exist."""
    corpus = cfg.data.corpus
    if corpus.startswith("bundled:"):
        if corpus.split(":", 1)[1] not in ("long", "short"):
            raise ConfigError(f"unknown bundled corpus {corpus!r}")
    elif not Path(corpus).is_file():
        raise ConfigError(f"corpus file not found: {corpus}")
    if cfg.data.vocab_mode not in ("byte", "whitespace"):
        raise ConfigError(f"vocab_mode must be byte or whitespace, got {cfg.data.vocab_mode!r}")
    if cfg.spec.drafter not in DRAFTER_KINDS:
        raise ConfigError(f"spec drafter must be one of {DRAFTER_KINDS}")
    if not 0 <= cfg.spec.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    positive = {
        "spec gamma": cfg.spec.gamma, "spec steps": cfg.spec.steps, "spec ar_gamma": cfg.spec.ar_gamma,
        "spec max_tokens": cfg.spec.max_tokens, "bench trials": cfg.bench.trials,
        "bench prompt_len": cfg.bench.prompt_len, "denoiser train_steps": cfg.denoiser.train_steps - 1,
    }
    for name, value in positive.items():
        if value < 1:
            raise ConfigError(f"{name} is out of range")
    if not cfg.spec.temperature > 0:
        raise ConfigError("temperature must be > 0")
    if min(cfg.target.smoothing_lambda, cfg.ar_drafter.smoothing_lambda, cfg.denoiser.smoothing_lambda) <= 0:
        raise ConfigError("smoothing lambdas must be positive")
    costs = (cfg.bench.target_call_cost, cfg.bench.ar_step_cost, cfg.bench.diff_step_cost)
    if min(costs) <= 0:
        raise ConfigError("costs must be positive")
    if min(cfg.bench.sweep_gammas) < 1 or min(cfg.bench.sweep_steps) < 1:
        raise ConfigError("sweep ranges must hold positive integers")
    return cfg


def load(path=None) -> RunConfig:
    if path is None:
        return validate(RunConfig())
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return validate(from_text(path.read_text(encoding="utf-8"), str(path)))
