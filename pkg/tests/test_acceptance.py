"""Acceptance criteria 1-12 at their stated tolerances, one PASS/FAIL line each."""

import pytest

from conftest import ACCEPTANCE_LINES
from matherm.acceptance import CRITERIA

SLOW = {11, 12}


@pytest.mark.parametrize(
    "number", [pytest.param(i, marks=pytest.mark.slow) if i in SLOW else i for i in sorted(CRITERIA)]
)
def test_criterion(number):
    res = CRITERIA[number]()
    print(res.line)
    ACCEPTANCE_LINES.append(res.line)
    assert res.passed, "\n".join(d["note"] for d in res.details if not d["ok"])
