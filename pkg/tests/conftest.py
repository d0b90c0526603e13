import pytest

# (criterion, part) -> (ok, detail), filled by the acceptance suite
ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(n, part, ok, detail=""):
        ACCEPTANCE[(n, part)] = (bool(ok), detail)
        print(f"criterion {n} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted({k[0] for k in ACCEPTANCE}):
        parts = sorted((k[1], v) for k, v in ACCEPTANCE.items() if k[0] == n)
        ok = all(v[0] for _, v in parts)
        failed = [p for p, v in parts if not v[0]]
        note = f" (failing parts: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}{note}")
        for p, (good, detail) in parts:
            tr.write_line(f"    {p}: {'PASS' if good else 'FAIL'} {detail}")
