import numpy as np
import pytest

from hardylab import DoobKernel, GridFunction, HarmonicProfile, HeatKernel


@pytest.fixture(scope="session")
def identity():
    return HarmonicProfile.identity()


@pytest.fixture(scope="session")
def half_line():
    return HeatKernel.half_line_dirichlet()


@pytest.fixture(scope="session")
def dk_identity(half_line, identity):
    return DoobKernel(half_line, identity)


def sample(fn, lo, hi, n, ball=None) -> GridFunction:
    xs = np.linspace(lo, hi, n)
    return GridFunction(xs, np.asarray(fn(xs), dtype=float), ball)
