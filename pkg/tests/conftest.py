"""
Pytest configuration and shared fixtures
"""

import numpy as np
import pytest

from srpsim.core.energy import JumpEnergy
from srpsim.core.lattice import LatticeSpec
from srpsim.sampling.mcmc import ChainConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow statistical tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical test, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def square8():
    return LatticeSpec.square(8)


@pytest.fixture(scope="session")
def quadratic():
    return JumpEnergy.quadratic()


@pytest.fixture
def rng():
    """Seeded numpy generator for building random test states"""
    return np.random.default_rng(20240601)


@pytest.fixture
def quick_chain():
    """Short schedule for smoke runs"""
    return ChainConfig(alpha=0.8, seed=7, thermalization_sweeps=5, sweeps_between_samples=2)
