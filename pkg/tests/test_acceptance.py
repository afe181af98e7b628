"""Acceptance suite: one check per criterion, each with its time limit.

Run with ``pytest tests/test_acceptance.py -v`` (a summary block with one
PASS/FAIL line per criterion is printed at the end) or standalone with
``python tests/test_acceptance.py``."""

import functools
import sys
import time

import pytest

from artin_dehn.cli import SUITES, quotient_corpus

# criterion -> (suite, time limit in seconds)
CRITERIA = {
    1: ("relators", 1),
    2: ("small-cancellation", 5),
    3: ("greendlinger", 30),
    4: ("layers", 30),
    5: ("moves", 60),
    6: ("prisms", 1),
    7: ("quotients", 30),
    8: ("minimal-quotients", 300),
    9: ("wp-agreement", 600),
    10: ("area-bounds", 600),
    11: ("wp-agreement", 600),
}

REPORT: dict[int, str] = {}


@functools.lru_cache(maxsize=None)
def run_suite(name: str):
    t0 = time.perf_counter()
    res = SUITES[name](seed=0)
    return res, time.perf_counter() - t0


def extra_checks(n: int, res) -> list[str]:
    """Conditions of a criterion beyond the suite's own pass flag."""
    out = []
    s = res.summary
    if n == 3 and s.get("diagrams", 0) < 200:
        out.append(f"only {s.get('diagrams')} diagrams")
    if n == 4:
        alpha = max(r[2] for r in res.rows)
        beta = max(r[3] for r in res.rows)
        if alpha > 1 or beta > 2:
            out.append(f"alpha {alpha}, beta {beta}")
        if sum(r[5] for r in res.rows) or not all(r[4] for r in res.rows):
            out.append("layer violations")
    if n == 5:
        if s.get("flap area after free reduction") != "4 -> 2":
            out.append(f"flap area {s.get('flap area after free reduction')}")
        diamond, imove = res.rows
        if diamond[1] < 1000 or imove[1] < 100:
            out.append(f"{diamond[1]} diamond moves, {imove[1]} I-moves")
    if n == 7 and len(quotient_corpus(0)) < 50:
        out.append("fewer than 50 diagrams")
    if n == 8 and s.get("diagrams", 0) < 30:
        out.append(f"only {s.get('diagrams')} diagrams")
    if n == 9:
        if s.get("conflicts") or s.get("max length") != 8:
            out.append(f"{s.get('conflicts')} conflicts up to length {s.get('max length')}")
    if n == 10 and s.get("samples", 0) < 100:
        out.append(f"only {s.get('samples')} samples")
    if n == 11 and s.get("syllable violations"):
        out.append(f"{s['syllable violations']} syllable violations")
    return out


def evaluate(n: int) -> tuple[bool, str]:
    name, limit = CRITERIA[n]
    res, secs = run_suite(name)
    problems = extra_checks(n, res)
    # criterion 11 reads a separate count from the shared run, so its own
    # pass does not depend on the other wp-agreement checks
    ok_suite = res.passed if n != 11 else True
    if not ok_suite:
        problems = res.notes[:3] + problems
    ok = ok_suite and not problems and secs <= limit
    if secs > limit:
        problems.append(f"took {secs:.1f}s > {limit}s")
    line = f"criterion {n:2d} [{name}] {'PASS' if ok else 'FAIL'} ({secs:.1f}s / {limit}s)"
    if problems:
        line += ": " + "; ".join(map(str, problems))
    REPORT[n] = line
    return ok, line


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, line = evaluate(n)
    print(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for n in sorted(CRITERIA):
        ok, line = evaluate(n)
        print(line, flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
