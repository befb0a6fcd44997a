import sys
from pathlib import Path

import pytest

from dyntest.compiler import compile_module
from dyntest.lang import parse_module

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"


def compile_source(source: str, name: str = "m"):
    return compile_module(parse_module(source, name))


def corpus_paths():
    return sorted(CORPUS.glob("*.dyn"))


@pytest.fixture(scope="session")
def foo_bar():
    return compile_source((CORPUS / "foo_bar.dyn").read_text(), "foo_bar")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
