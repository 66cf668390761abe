"""Acceptance criteria at full scale; one pass/fail line per criterion.

Run as a script for the bare report: ``python tests/test_acceptance.py [--quick]``.
"""
import sys

import pytest

from levyx import verify

RESULTS = []


@pytest.mark.parametrize("k", sorted(verify.CRITERIA))
def test_criterion(k):
    r = verify.run_criterion(k, quick=False)
    RESULTS.append(r.line())
    print(r.line())
    for c in r.checks:
        print("    ", c.name, c.value, "<=", c.tol, "info" if c.informational else "", c.detail)
    assert r.error is None, r.error
    assert r.passed, r.line()


if __name__ == "__main__":
    res = verify.run_all(quick="--quick" in sys.argv, echo=print)
    print(f"{sum(r.passed for r in res)}/{len(res)} criteria passed")
