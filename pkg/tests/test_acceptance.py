"""One asserted verdict per built-in check.

The full battery runs once per session; each parametrized case then reads
its own result, so the -v listing shows one pass/fail line per check. A red
line here means the stated expectation was computed and not met, with the
observed numbers in the assertion message.
"""

import pytest

from nonauto.acceptance import CRITERION_KEYS, run_all

_RESULTS = None


def results():
    global _RESULTS
    if _RESULTS is None:
        _RESULTS = {r.key: r for r in run_all()}
    return _RESULTS


@pytest.mark.parametrize("key", CRITERION_KEYS)
def test_criterion(key):
    r = results()[key]
    assert r.passed, f"{r.title}: {r.details}"


def test_every_check_is_covered():
    assert set(results()) == set(CRITERION_KEYS)
    assert len(CRITERION_KEYS) == 10
