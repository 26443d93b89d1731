import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hoarefl.formats import load_hoare, load_theory  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
ENTRIES = ("assign", "test", "comp", "union", "loop1", "nested", "monoid_loop")
THEORY_ENTRIES = {"monoid_loop"}


@pytest.fixture(scope="session")
def monoid():
    return load_theory(CORPUS / "monoid.fol")


def theory_for(name, monoid_theory):
    return monoid_theory if name in THEORY_ENTRIES else None


@pytest.fixture(scope="session")
def corpus(monoid):
    """name -> (Hoare derivation, theory or None)."""
    return {n: (load_hoare(CORPUS / f"{n}.hl"), theory_for(n, monoid)) for n in ENTRIES}


@pytest.fixture(scope="session")
def compiled(corpus):
    from hoarefl.compile import compile_hoare_to_flp
    return {n: compile_hoare_to_flp(d, th) for n, (d, th) in corpus.items()}


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
