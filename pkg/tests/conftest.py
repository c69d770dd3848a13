import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from jsieve.tree import BlowupScript, EdgeBlowup, PointBlowup, apply_step, initial_tree, replay

WORKED_EXAMPLE = Path(__file__).resolve().parents[1] / "src" / "jsieve" / "data" / "section2.blowups"


@pytest.fixture(scope="session")
def worked_script():
    return BlowupScript.parse(WORKED_EXAMPLE.read_text())


@pytest.fixture(scope="session")
def worked(worked_script):
    return replay(worked_script)


@pytest.fixture
def rng():
    return random.Random(20260115)


@st.composite
def scripts(draw, max_len=12):
    """Legal scripts: each step is drawn among the moves available at that point."""
    n = draw(st.integers(0, max_len))
    t = initial_tree()
    steps = []
    for _ in range(n):
        moves = [PointBlowup(v) for v in t.ids()] + [EdgeBlowup(i, j) for i, j in sorted(t.edges)]
        step = moves[draw(st.integers(0, len(moves) - 1))]
        t = apply_step(t, step)
        steps.append(step)
    return BlowupScript(tuple(steps))


@pytest.fixture(scope="session")
def depth8_default():
    from jsieve.config import RunConfig
    from jsieve.search import search
    return search(RunConfig(max_blowups=8))


@pytest.fixture(scope="session")
def depth8_relaxed():
    from jsieve.config import RunConfig
    from jsieve.search import search
    return search(RunConfig(max_blowups=8, allow_no_type1=True, allow_negative_L=True))


# -- acceptance lines -----------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Call with (criterion number, ok, detail); the line is echoed now and
    again in the terminal summary."""
    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
