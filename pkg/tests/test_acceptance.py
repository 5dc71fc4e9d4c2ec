"""Acceptance gate: one pass/fail line per criterion, run at full size.

Each criterion prints its verdict line even without ``-s``. Criterion 10 re-runs
criteria 1-9 with four workers and compares against the one-worker results.
"""
import pytest

from kzlab.acceptance import CRITERIA, c10_determinism, run_criterion

_RESULTS = {}


def _result(number):
    if number not in _RESULTS:
        _RESULTS[number] = run_criterion(number, workers=1)
    return _RESULTS[number]


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    r = _result(number)
    with capsys.disabled():
        print("\n" + r.line(), flush=True)
    assert r.passed, r.line()


def test_criterion_10_determinism(capsys):
    baseline = {n: _result(n) for n in sorted(CRITERIA)}
    r = c10_determinism(baseline, workers=4)
    with capsys.disabled():
        print("\n" + r.line(), flush=True)
    assert r.passed, r.line()
