from pathlib import Path

import numpy as np
import pytest

from conewise.cover import canonicalize
from conewise.generators import four_ray, standard

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def std2():
    return canonicalize(standard(2)).space


@pytest.fixture(scope="session")
def std3():
    return canonicalize(standard(3)).space


@pytest.fixture(scope="session")
def fr_raw():
    return four_ray()


@pytest.fixture(scope="session")
def fr_cover():
    return canonicalize(four_ray())


@pytest.fixture(scope="session")
def fr(fr_cover):
    return fr_cover.space


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def acceptance():
    """Callable ``(number, title, ok, detail)`` that prints and records one verdict line."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        print(line)
        _ACCEPTANCE.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
