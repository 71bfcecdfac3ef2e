import pytest

from multiscale_is import analytic_moments, sample_field, FieldSpec

# Lines recorded by the acceptance module, echoed in the terminal summary.
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def stats1():
    return analytic_moments(1.0)


@pytest.fixture(scope="session")
def field():
    return sample_field(FieldSpec(n_modes=200, seed=1))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
