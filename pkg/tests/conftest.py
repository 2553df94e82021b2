import os
import shlex
import shutil
import sys

import pytest

from rslv.smt import DEFAULT_SOLVER

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(ROOT, "corpus")
GOLDEN = os.path.join(ROOT, "tests", "golden")

HAVE_SOLVER = shutil.which(shlex.split(DEFAULT_SOLVER)[0]) is not None

needs_solver = pytest.mark.skipif(not HAVE_SOLVER, reason="no SMT solver on PATH")


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name)


def read_corpus(name: str) -> str:
    with open(corpus_path(name)) as fh:
        return fh.read()


BANK_HEAD = read_corpus("withdraw2_resources.rsl").split("#[requires(resource(Money(acct_id1)")[0]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
