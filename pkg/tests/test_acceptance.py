"""Acceptance battery: one test per criterion, one PASS/FAIL line per criterion.

Runs the full suite twice (the second run feeds the determinism check), so
expect several minutes.  Also usable as a script:

    python tests/test_acceptance.py [seed]
"""

import sys

import pytest

from freelip.suite import BUDGETS, TITLES, run_acceptance

SEED = 0


@pytest.fixture(scope="module")
def acceptance():
    return run_acceptance(SEED)


def _line(result, timings) -> str:
    num = result["criterion"]
    tag = "PASS" if result["passed"] and _in_budget(num, timings) else "FAIL"
    text = f"[{tag}] criterion {num}: {result['title']}"
    if num in timings:
        text += f" ({timings[num]:.1f} s, budget {BUDGETS[num]} s)"
    bad = [k for k, v in result["checks"].items() if not v]
    if bad:
        text += " -- failed: " + "; ".join(bad)
    for k, v in result.get("supplementary", {}).items():
        text += f"\n    [{'PASS' if v else 'FAIL'}] supplementary: {k}"
    return text


def _in_budget(num, timings) -> bool:
    return num not in BUDGETS or timings[num] < BUDGETS[num]


@pytest.mark.slow
@pytest.mark.parametrize("num", sorted(TITLES))
def test_criterion(acceptance, capsys, num):
    rep, timings = acceptance
    result = next(r for r in rep["criteria"] if r["criterion"] == num)
    with capsys.disabled():
        print("\n" + _line(result, timings))
    failed = {k: v for k, v in result["checks"].items() if not v}
    assert result["passed"], f"criterion {num} failed checks: {sorted(failed)}"
    assert _in_budget(num, timings), f"criterion {num} took {timings[num]:.1f} s (budget {BUDGETS[num]} s)"


def main(argv) -> int:
    seed = int(argv[1]) if len(argv) > 1 else SEED
    rep, timings = run_acceptance(seed)
    ok = True
    for r in rep["criteria"]:
        print(_line(r, timings))
        ok = ok and r["passed"] and _in_budget(r["criterion"], timings)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
