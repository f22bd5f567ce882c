import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ziptrace.slp import Slp  # noqa: E402
from ziptrace.trace import parse_trace  # noqa: E402

SIGMA1_TEXT = """\
1|w(x)
1|fork(2)
2|r(x)
2|acq(l)
2|w(y)
2|rel(l)
1|r(x)
1|acq(l)
1|rel(l)
1|w(y)
2|r(x)
2|acq(l)
2|w(y)
2|rel(l)
1|join(2)
1|w(y)
"""

SIGMA2_TEXT = """\
1|r(x)
1|acq(l)
1|w(y)
1|rel(l)
2|acq(l)
2|r(x)
2|w(y)
1|w(z)
2|rel(l)
2|r(x)
1|r(x)
"""

# rule ids for the hand-built grammars
S, A, B, C, D, E, F, G = range(8)
U, V, W, X, Y, Z = range(1, 7)


def sigma1():
    return parse_trace(SIGMA1_TEXT)


def sigma2():
    return parse_trace(SIGMA2_TEXT)


def sigma1_grammar() -> Slp:
    e = (None,) + sigma1().labels
    return Slp(S, {
        S: (A, B),
        A: (C, D),
        C: (E, F),
        B: (F, G),
        E: e[1:3],
        F: e[3:7],
        D: e[7:11],
        G: e[15:17],
    })


def sigma2_grammar() -> Slp:
    e = (None,) + sigma2().labels
    return Slp(0, {
        0: (U, V),
        U: (W, X),
        V: (Y, Z),
        W: e[1:3],
        X: e[3:6],
        Y: e[6:8],
        Z: e[8:12],
    })


@pytest.fixture
def s1():
    return sigma1()


@pytest.fixture
def s2():
    return sigma2()


@pytest.fixture
def g1():
    return sigma1_grammar()


@pytest.fixture
def g2():
    return sigma2_grammar()


@pytest.fixture
def s1_file(tmp_path):
    p = tmp_path / "s1.trace"
    p.write_text(SIGMA1_TEXT)
    return p


@pytest.fixture
def s2_file(tmp_path):
    p = tmp_path / "s2.trace"
    p.write_text(SIGMA2_TEXT)
    return p


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
