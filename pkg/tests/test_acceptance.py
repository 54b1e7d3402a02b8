import time

import pytest

from sotlab import acceptance


@pytest.mark.parametrize("fn", acceptance.CRITERIA, ids=lambda f: f.__name__)
def test_criterion_full(fn):
    result = fn(quick=False, seed=acceptance.DEFAULT_SEED, workers=4)
    assert result.passed, \
        f"criterion {result.criterion} ({result.name}): {result.detail}"


def test_quick_suite_under_two_minutes():
    start = time.monotonic()
    results = acceptance.run_all(quick=True, seed=acceptance.DEFAULT_SEED,
                                 workers=4)
    elapsed = time.monotonic() - start
    assert all(r.passed for r in results), [
        (r.criterion, r.detail) for r in results if not r.passed]
    assert elapsed < 120.0, f"quick suite took {elapsed:.1f}s"
