import time

import numpy as np
import pytest

from salsum.data import SENT, build_vocab, get_profile, preprocess, synthetic_corpus
from salsum.model import ModelConfig, SeasonModel

SUITE_BUDGET_S = 300.0
_ACCEPTANCE: list[tuple[str, bool, str]] = []
_START = time.monotonic()


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    _ACCEPTANCE.append((name, ok, detail))


def tiny_config(**overrides) -> ModelConfig:
    base = dict(d_model=8, n_heads=2, enc_layers=1, dec_layers=1, ffn_dim=16, vocab_size=12,
                max_src_len=40, max_tgt_len=16, seed=0)
    base.update(overrides)
    return ModelConfig(**base)


def random_source(rng: np.random.Generator, vocab_size: int, n_sent: int | None = None) -> list[int]:
    n_sent = n_sent or int(rng.integers(1, 4))
    ids = []
    for _ in range(n_sent):
        ids.append(SENT)
        ids.extend(int(t) for t in rng.integers(5, vocab_size, size=int(rng.integers(1, 6))))
    return ids


@pytest.fixture
def tiny_model():
    return SeasonModel(tiny_config()).eval()


@pytest.fixture(scope="session")
def copy_corpus():
    corpus = synthetic_corpus(24, seed=3)
    vocab = build_vocab(corpus, 8000)
    profile = get_profile("custom", 64, 16)
    return corpus, vocab, [preprocess(e, profile, vocab) for e in corpus]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    elapsed = time.monotonic() - _START
    terminalreporter.write_line(
        f"{'PASS' if elapsed < SUITE_BUDGET_S else 'FAIL'}  C11b full suite runtime {elapsed:.1f}s < {SUITE_BUDGET_S:.0f}s"
    )


def pytest_sessionfinish(session, exitstatus):
    if time.monotonic() - _START > SUITE_BUDGET_S and session.exitstatus == 0:
        session.exitstatus = 1
