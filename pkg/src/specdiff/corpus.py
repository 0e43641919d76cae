"""Procedural text corpora bundled as fixtures.

Two flavours, both generated from a fixed seed so the shipped files can be
regenerated bit-for-bit:

* ``long``: documents made of long formulaic sentences that mostly follow one
  another in a fixed order, with a few low-entropy word choices per sentence.
  Continuations stay predictable for dozens of characters.
* ``short``: independent one-line utterances of at most ~30 characters; each
  new line is an unpredictable pick, so predictability resets every line.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

WORDS = """
the a old small quiet bright long narrow green grey cold warm dark pale
river hill road house garden window bridge field forest lamp door stone tower
market harbor village valley morning evening winter summer letter song boat
wind rain light shadow bell clock table chair path wall roof fire smoke
walked carried opened watched followed crossed found kept turned heard
painted counted lifted gathered remembered waited listened answered
slowly gently early quickly softly again later together almost always
and but then while because before after until where when
of over under near beside behind across through into from with
keeper miller baker sailor teacher farmer weaver singer traveler stranger
""".split()

SHORT_WORDS = """
yes no maybe soon later now here there fine good thanks sure okay right
wait stop go come look see listen tell ask help please sorry hello well
tea bread rain sun cat dog bus train key book coat door time home
""".split()

DATA_FILES = {"long": "corpus_long.txt", "short": "corpus_short.txt"}


def _sentence_templates(rng: np.random.Generator, n: int, lo: int, hi: int, slots: int):
    templates = []
    for _ in range(n):
        length = int(rng.integers(lo, hi + 1))
        words = [[str(w)] for w in rng.choice(WORDS, size=length)]
        for pos in rng.choice(np.arange(1, length), size=min(slots, length - 1), replace=False):
            alts = [str(w) for w in rng.choice(WORDS, size=3, replace=False)]
            words[int(pos)] = alts
        templates.append(words)
    return templates


def _render(template, rng: np.random.Generator, skew) -> str:
    out = []
    for options in template:
        if len(options) == 1:
            out.append(options[0])
        else:
            out.append(options[int(rng.choice(len(options), p=skew))])
    return " ".join(out)


def synth_long(n_chars: int = 40_000, seed: int = 7, n_sentences: int = 36, follow: float = 0.85,
               skew=(0.8, 0.12, 0.08), slots: int = 4) -> str:
    rng = np.random.default_rng(seed)
    templates = _sentence_templates(rng, n_sentences, 10, 16, slots=slots)
    parts: list[str] = []
    size = 0
    k = int(rng.integers(n_sentences))
    while size < n_chars:
        s = _render(templates[k], rng, skew) + ". "
        if rng.random() < 0.05:
            s += "\n"
        parts.append(s)
        size += len(s)
        k = (k + 1) % n_sentences if rng.random() < follow else int(rng.integers(n_sentences))
    return "".join(parts)[:n_chars]


def synth_short(n_chars: int = 30_000, seed: int = 11, n_lines: int = 600) -> str:
    rng = np.random.default_rng(seed)
    lines = []
    for _ in range(n_lines):
        words = []
        while True:
            w = str(rng.choice(SHORT_WORDS))
            if len(" ".join(words + [w])) > 28:
                break
            words.append(w)
        lines.append(" ".join(words))
    weights = rng.dirichlet(np.ones(n_lines))
    parts: list[str] = []
    size = 0
    while size < n_chars:
        s = lines[int(rng.choice(n_lines, p=weights))] + "\n"
        parts.append(s)
        size += len(s)
    return "".join(parts)[:n_chars]


def generate(kind: str) -> str:
    if kind == "long":
        return synth_long()
    if kind == "short":
        return synth_short()
    raise ValueError(f"unknown corpus kind {kind!r}")


def bundled_path(kind: str):
    return resources.files("specdiff") / "data" / DATA_FILES[kind]


def load_bundled(kind: str) -> str:
    return bundled_path(kind).read_text(encoding="utf-8")
