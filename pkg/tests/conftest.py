import numpy as np
import pytest

from specdiff.bench import ModelSet
from specdiff.core import SeededRng, Vocab
from specdiff.corpus import synth_long
from specdiff.diffusion import AbsorbingSchedule, build_denoiser, train_denoiser
from specdiff.models import ArDrafter, train_context_model


def small_vocab(n: int) -> Vocab:
    return Vocab(tuple("abcdef"[:n]) + ("<bos>", "<mask>"))


class ListRng:
    """Stand-in for SeededRng that hands out pre-chosen uniforms."""

    def __init__(self, values):
        self.values = list(values)
        self.drawn = 0

    def random(self, size=None):
        if size is None:
            self.drawn += 1
            return self.values.pop(0)
        out = np.array(self.values[:size])
        del self.values[:size]
        self.drawn += size
        return out


@pytest.fixture(scope="session")
def toy_models() -> ModelSet:
    """Small long-corpus models (8k chars) trained with the default recipe but fewer epochs."""
    text = synth_long(8000)
    vocab = Vocab.from_text(text)
    ids = vocab.encode(text)
    target = train_context_model(ids, 12, 1e-6, vocab)
    ar = ArDrafter(train_context_model(ids, 12, 0.05, vocab))
    den = build_denoiser(ids, vocab, context=12, smoothing_lambda=0.05)
    train_denoiser(den, ids, AbsorbingSchedule(20), 40, 0.5, SeededRng(0, 4), n_windows=80)
    return ModelSet(vocab, ids, target, ar, den)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
