import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from cacheclust.profiles import AppProfile

# One "PASS: ..." / "FAIL: ..." line per acceptance criterion, echoed at the
# end of the run so they survive pytest's output capture.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def make_profile(name="app", slowdown=None, llcmpkc=None, ipc=None, nr_ways=None):
    """Build a profile from partial curves, padding flat tails."""
    if nr_ways is None:
        nr_ways = max(len(x) for x in (slowdown or [], llcmpkc or [], ipc or []) if x)

    def pad(values, fill):
        values = list(values) if values else []
        if not values:
            values = [fill]
        values += [values[-1]] * (nr_ways - len(values))
        return tuple(values[:nr_ways])

    sd = pad(slowdown, 1.0)
    return AppProfile(
        name=name,
        nr_ways=nr_ways,
        ipc=pad(ipc, 1.0) if ipc else tuple(1.0 / s for s in sd),
        slowdown=sd,
        llcmpkc=pad(llcmpkc, 1.0),
    )
