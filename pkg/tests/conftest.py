import pytest

from charkit.lts import Lts, random_lts

ACCEPTANCE_LINES = []


def record(number, ok, text):
    """Remember one acceptance verdict; the summary hook prints them in order."""
    verdict = "PASS" if ok else "FAIL"
    ACCEPTANCE_LINES.append((number, f"[{verdict}] criterion {number}: {text}"))
    print(ACCEPTANCE_LINES[-1][1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


# a.b + a versus a.b, with p2 doubling as the shared deadlock
AB_TEXT = """\
states: p p1 p2 q q1
labels: a b
trans: p a p1
trans: p a p2
trans: p1 b p2
trans: q a q1
trans: q1 b p2
"""


@pytest.fixture
def ab_lts():
    return Lts.build(
        ["p", "p1", "p2", "q", "q1"],
        ["a", "b"],
        [("p", "a", "p1"), ("p", "a", "p2"), ("p1", "b", "p2"), ("q", "a", "q1"), ("q1", "b", "p2")],
    )


def random_instances(count, seed=0, max_states=6, max_labels=3, densities=(0.1, 0.3, 0.7), **annotate):
    """Deterministic stream of random LTSs for property loops."""
    for i in range(count):
        s = seed * 100_003 + i
        yield random_lts(
            1 + s % max_states,
            1 + (s // max_states) % max_labels,
            densities[i % len(densities)],
            s,
            **annotate,
        )


ALL_ANNOTATIONS = dict(diverge=True, preorder=True, agents=True)
