"""Acceptance criteria, one test each.

Each test records a PASS/FAIL line that is printed in the pytest summary.
Run this file directly (python tests/test_acceptance.py) to print only the lines.
"""
import sys
import time

import pytest
import sympy

from fzeta.verify import ACCEPTANCE, PRESETS, identity_suite, timed


@pytest.mark.parametrize("name, fn", ACCEPTANCE, ids=[n for n, _ in ACCEPTANCE])
def test_criterion(name, fn, acceptance_log):
    result = timed(name, fn)
    acceptance_log.append(result.line())
    assert result.passed, result.line()


def test_powertail_tube_zeta_symbolically():
    # tube zeta of PowerTail(2) at T = 1 from its functional equation: (1 - zeta)/(s+2) with zeta = 1/(s+3)
    s = sympy.symbols("s")
    zeta = 1 / (s + 3)
    tube_zeta = (1 - zeta) / (s + 2)
    assert sympy.simplify(tube_zeta - 1 / (s + 3)) == 0
    assert sympy.residue(zeta, s, -3) == 1


def test_identity_suites_on_presets():
    start = time.perf_counter()
    failures = []
    for name, make in PRESETS.items():
        for r in identity_suite(make()):
            if not r.passed:
                failures.append(f"{name}: {r.line()}")
    elapsed = time.perf_counter() - start
    assert not failures, failures
    assert elapsed < 300.0


if __name__ == "__main__":
    ok = True
    for name, fn in ACCEPTANCE:
        r = timed(name, fn)
        print(r.line())
        ok &= r.passed
    sys.exit(0 if ok else 1)
