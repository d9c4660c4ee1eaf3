"""Acceptance suite: every criterion at its stated tolerance, one PASS/FAIL line each."""

import pytest

from misp.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"AC{c[0]:02d}" for c in CRITERIA])
def test_acceptance(number, capsys):
    res = run_criterion(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
