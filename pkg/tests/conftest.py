import pytest

# filled by the acceptance tests, printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture
def criterion(request):
    """Time a criterion and record one PASS/FAIL line for it."""
    import time

    class _Criterion:
        def __init__(self):
            self.number = None
            self.title = ""
            self.notes: list[str] = []
            self.t0 = time.perf_counter()

        def start(self, number, title):
            self.number, self.title = number, title
            self.t0 = time.perf_counter()

        def note(self, text):
            self.notes.append(text)

        @property
        def elapsed(self):
            return time.perf_counter() - self.t0

    c = _Criterion()
    yield c
    if c.number is None:
        return
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    line = f"[acceptance {c.number:2d}] {'PASS' if ok else 'FAIL'} {c.title} ({c.elapsed:.2f} s)"
    if c.notes:
        line += ": " + "; ".join(c.notes)
    ACCEPTANCE_LINES[c.number] = line
    print(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
