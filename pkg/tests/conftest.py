import numpy as np
import pytest

from gmrf_curvature import oracle
from gmrf_curvature.lattice import ModelParams
from gmrf_curvature.patch_stats import PatchCovariance


def random_inputs(rng, n):
    """``n`` (PatchCovariance, ModelParams) pairs over the acceptance ranges."""
    out = []
    for _ in range(n):
        s2 = rng.uniform(0.5, 4.0)
        cov = PatchCovariance.from_matrix(oracle.random_patch_covariance(rng, s2))
        out.append((cov, ModelParams(rng.normal(), s2, rng.uniform(0.0, 0.3))))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """``record(number, title, passed, detail)``; lines are echoed in the terminal summary."""
    def record(number, title, passed, detail=""):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
