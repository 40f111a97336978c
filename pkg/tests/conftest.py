# Acceptance tests record one verdict line per criterion here; the lines are
# printed together at the end of the session.
ACCEPTANCE: dict[str, list[tuple[str, bool]]] = {}


def record(criterion: str, clause: str, ok: bool) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((clause, bool(ok)))
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
        clauses = ACCEPTANCE[key]
        verdict = "PASS" if all(ok for _, ok in clauses) else "FAIL"
        detail = "; ".join(f"{text} [{'ok' if ok else 'FAILED'}]" for text, ok in clauses)
        terminalreporter.write_line(f"{key} {verdict}: {detail}")
