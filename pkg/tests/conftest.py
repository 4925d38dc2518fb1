from __future__ import annotations

import contextlib
import time

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            ACCEPTANCE[number] = ("FAIL", title, time.perf_counter() - start)
            raise
        ACCEPTANCE[number] = ("PASS", title, time.perf_counter() - start)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title, secs = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] AC{number:<2} {title} ({secs:.2f}s)")


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    """Seed-0 fixture corpus written to disk once per session."""
    from evidence_atlas.fixtures import emit_fixtures

    out = tmp_path_factory.mktemp("fixtures")
    emit_fixtures(0, out)
    return out
