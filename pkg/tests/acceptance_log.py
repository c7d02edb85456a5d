"""Collects one PASS/FAIL line per acceptance criterion."""

LINES = []


def record(number: int, ok: bool, detail: str) -> bool:
    LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    print(LINES[-1])
    return ok
