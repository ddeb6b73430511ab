import pytest

from banditgv import acceptance


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, acceptance_log):
    results = acceptance.CRITERIA[number]()
    ok = all(r.passed for r in results)
    acceptance_log[number] = (ok, [r.line() for r in results])
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}")
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)
