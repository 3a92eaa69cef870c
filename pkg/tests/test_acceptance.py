"""Acceptance suite: one test per numbered check, each printing a PASS/FAIL line.

The checks themselves live in ``ldfec.validation`` so the CLI ``validate``
command runs exactly the same code.
"""

import pytest

from ldfec.validation import CHECKS


@pytest.mark.parametrize("number", sorted(CHECKS), ids=lambda n: f"check_{n:02d}")
def test_acceptance(number, capsys):
    result = CHECKS[number]()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
