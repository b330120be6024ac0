import numpy as np
import pytest

from measgreen.model import make_spec
from measgreen.reference import example_spec

J2 = np.array([[0, -1], [1, 0]], dtype=complex)
S = np.array([[0, 2], [2, 0]], dtype=complex)
W = np.diag([2.0, 0.0]).astype(complex)


def two_atom_spec():
    """q = S (delta_1 - delta_2), w = diag(2, 0) (delta_1 + delta_2) on (0, 3)."""
    return make_spec(J2, [(1.0, S, W), (2.0, -S, W)], 0.0, 3.0)


@pytest.fixture
def two_atoms():
    return two_atom_spec()


@pytest.fixture(params=[1, 2])
def periodic(request):
    return example_spec(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
