import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``record(number, passed, detail)``."""
    seen = []

    def record(number: int, passed: bool, detail: str) -> None:
        seen.append(number)
        _RESULTS[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")

    yield record
    num = getattr(request.function, "criterion_number", None)
    if num is not None and num not in seen:
        _RESULTS[num] = (False, "did not complete (error before the check)")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        ok, detail = _RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
