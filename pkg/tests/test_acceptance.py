"""Acceptance criteria: one pass/fail line per criterion.

The lines are printed as each check runs (visible with ``-s``) and again in
the terminal summary (see ``conftest.py``).
"""

import pytest

from honeyvol.acceptance import CHECKS

RESULTS = {}


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number):
    result = CHECKS[number]()
    RESULTS[number] = result
    print(result.line())
    assert result.passed, result.line()
