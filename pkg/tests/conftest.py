import numpy as np
import pytest

from timescale_sl import Potential, ProblemSpec, make_domain, zero_problem


@pytest.fixture
def unit_domain():
    return make_domain(1.0, 2.0, 3.0)


@pytest.fixture
def zero_spec():
    return zero_problem()


def random_smooth_spec(rng, domain, n_modes=5, amp=0.5, boundary=True):
    """Cosine-series potential with random coefficients; optional random h, H."""
    left = rng.normal(size=n_modes) * amp
    right = rng.normal(size=n_modes) * amp
    h, H = (rng.normal(), rng.normal()) if boundary else (0.0, 0.0)
    return ProblemSpec(domain, Potential.cosine(domain, left, right), h, H)


# independent reference: bisection of the closed-form Delta for q = 0 on (1, 2, 3),
# scipy.optimize.bisect at xtol 1e-15 in s = sqrt(lambda), squared
ZERO_SPEC_EIGENVALUES = [
    0.0,
    1.0216494160500182,
    4.395915310441527,
    11.876553552167113,
    24.21531364052688,
    41.4847347607117,
    63.68953413223903,
    90.82975251936583,
]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
