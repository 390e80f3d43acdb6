from __future__ import annotations

import numpy as np
import pytest

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record_criterion(name: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE[name] = (passed, detail)


@pytest.fixture
def criterion():
    """Record a criterion outcome and assert it, so the summary shows every line."""

    def check(name: str, passed: bool, detail: str) -> None:
        record_criterion(name, bool(passed), detail)
        assert passed, f"{name}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20251015)


def random_orthogonal_np(rng: np.random.Generator, p: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))
