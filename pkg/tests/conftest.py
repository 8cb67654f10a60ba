import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def projection_oracle():
    from oracles import oracle_projections, random_shots

    shots, alpha, beta = random_shots()
    return shots, alpha, beta, oracle_projections(shots, alpha, beta)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def criterion():
    """Record a named acceptance result; every result is echoed in the summary."""

    def record(number, name, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
        _ACCEPTANCE.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
