import functools

import pytest
from hypothesis import HealthCheck, settings

from deligne_lab.simplicial import build_product, build_sphere, circle, cone, point, simplex

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def space(name: str):
    """Builder spaces shared across tests (complexes are immutable)."""
    table = {
        "point": point,
        "S1": lambda: circle(4),
        "hexagon": lambda: circle(6),
        "S2": lambda: build_sphere(2),
        "S3": lambda: build_sphere(3),
        "S4": lambda: build_sphere(4),
        "S5": lambda: build_sphere(5),
        "T2": lambda: build_product(circle(3), circle(3)),
        "S1xS2": lambda: build_product(circle(3), build_sphere(2)),
        "disk": lambda: cone(circle(6)),
        "edge": lambda: simplex(1),
    }
    return table[name]()


@pytest.fixture
def get_space():
    return space


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
