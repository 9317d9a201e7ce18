import os

from hypothesis import settings

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

# (criterion, check, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, check, ok, detail in ACCEPTANCE:
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  [{crit}] {check}: {detail}")
    tr.write_line("")
    for crit in sorted({c for c, *_ in ACCEPTANCE}):
        rows = [r for r in ACCEPTANCE if r[0] == crit]
        bad = [r[1] for r in rows if not r[2]]
        verdict = "PASS" if not bad else "FAIL"
        tail = f" (failing: {'; '.join(bad)})" if bad else ""
        tr.write_line(f"{verdict}  criterion {crit}: {len(rows) - len(bad)}/{len(rows)} checks{tail}")
