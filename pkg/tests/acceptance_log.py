"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

RESULTS: list[tuple[str, bool, str]] = []


def record(cid: str, ok: bool, detail: str) -> bool:
    RESULTS.append((cid, bool(ok), detail))
    return bool(ok)
