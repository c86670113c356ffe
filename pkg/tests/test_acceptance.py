"""End-to-end acceptance battery at full resolution.

One test per criterion; each prints a single machine-greppable
[PASS]/[FAIL] line with the measured quantities.  The two heavy runs
(main preset and its dt-halved twin) are computed once per session and
shared, so the first criterion pays the wall-clock cost.
"""

import pytest

from xnls.acceptance import CRITERIA, Lab


@pytest.fixture(scope="module")
def lab():
    return Lab(fast=False)


@pytest.mark.parametrize("name,fn", CRITERIA, ids=[n for n, _ in CRITERIA])
def test_criterion(name, fn, lab, capsys):
    passed, detail = fn(lab)
    with capsys.disabled():
        status = "PASS" if passed else "FAIL"
        print(f"\n[{status}] {name}: {detail}")
    assert passed, f"{name}: {detail}"
