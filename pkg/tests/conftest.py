import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_admissible(rng, n, sigma2=1 / 3, vmax=0.999):
    """Random primitive states in G_p and their conserved images."""
    from cpcoedg.fluid import LinearEos, prim_to_cons

    eos = LinearEos(sigma2=sigma2)
    rho = 10 ** rng.uniform(-6, 3, n)
    v = rng.uniform(-vmax, vmax, n)
    T00, T01, T11 = prim_to_cons(rho, v, eos)
    return eos, rho, v, T00, T01, T11


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
