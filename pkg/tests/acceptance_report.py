"""Collects one verdict line per acceptance criterion for the terminal summary."""
import time
from contextlib import contextmanager

LINES: dict = {}


@contextmanager
def criterion(number: int, title: str, budget: float, tolerance: str = "exact"):
    """Time a criterion; the body sets ``box['ok']`` and ``box['detail']``."""
    box = {"ok": False, "detail": "did not finish"}
    start = time.perf_counter()
    try:
        yield box
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed <= budget
        ok = box["ok"] and within
        note = box["detail"] + ("" if within else f"; over the {budget:.0f}s budget")
        LINES[number] = (f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {note} "
                         f"(tolerance {tolerance}; {elapsed:.1f}s of {budget:.0f}s)")
        box["passed"] = ok
