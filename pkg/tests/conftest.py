from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from carnotlie.cli import load_corpus

DATA = Path(__file__).parent / "data"
CORPUS = load_corpus()
CORPUS_IDS = [name for name, _ in CORPUS]
CORPUS_ALGEBRAS = [alg for _, alg in CORPUS]


def identity_gram(alg):
    d = alg.strata_dims[0]
    return [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]


@pytest.fixture(params=CORPUS_ALGEBRAS, ids=CORPUS_IDS)
def corpus_alg(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
