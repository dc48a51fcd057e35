import math

import pytest

from moyalgeom import expr as ex
from moyalgeom.moyal import AlgebraContext

# keep hypothesis runs short and reproducible
try:
    from hypothesis import HealthCheck, settings

    settings.register_profile("repo", max_examples=40, deadline=None, derandomize=True,
                              suppress_health_check=[HealthCheck.too_slow])
    settings.load_profile("repo")
except ImportError:  # pragma: no cover
    pass


@pytest.fixture(scope="session")
def plane():
    """Two noncommuting coordinates with theta_12 = 1, N = 3."""
    box = ex.SampleBox({"x": (-1.5, 1.5), "y": (-1.5, 1.5)}, seed=3)
    return AlgebraContext(["x", "y"], [[0, 1], [-1, 0]], 3, (), box)


@pytest.fixture(scope="session")
def angles():
    box = ex.SampleBox({"theta": (0.3, math.pi - 0.3), "phi": (0.3, 2 * math.pi - 0.3)}, seed=5)
    return AlgebraContext(["theta", "phi"], [[0, 1], [-1, 0]], 3, (), box)


@pytest.fixture(scope="session")
def sphere_geom():
    from moyalgeom.geometry import build_geometry
    from moyalgeom.presets import load_preset
    return build_geometry(load_preset("sphere").spec)


@pytest.fixture(scope="session")
def flat_geom():
    from moyalgeom.geometry import build_geometry
    from moyalgeom.presets import load_preset
    return build_geometry(load_preset("flat").spec)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list = []


@pytest.fixture
def acceptance():
    def record(number, title, passed, elapsed, limit, detail=""):
        status = "PASS" if passed and elapsed < limit else "FAIL"
        extra = f"; {detail}" if detail else ""
        ACCEPTANCE_LINES.append(
            (number, f"{status} criterion {number}: {title} ({elapsed:.1f}s of {limit}s{extra})"))
        return status == "PASS"
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
