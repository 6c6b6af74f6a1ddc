"""
Shared fixtures and the --runslow switch
"""
import os
import sys

import numpy as np
import pytest
from hypothesis import settings

# Add repository root to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from design.dataset import CovarianceSpec, Dataset, GroundTruth, attach_response, fixed_signal, generate_design

settings.register_profile("fast", max_examples=20, deadline=None)
settings.register_profile("default", deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_problem(n, p, values, sigma=0.0, seed=0, kind="identity", rho=0.0):
    truth = GroundTruth.from_beta(fixed_signal(p, values), sigma, n)
    design = generate_design(n, CovarianceSpec(kind=kind, p=p, rho=rho), seed)
    return truth, attach_response(design, truth, seed + 1)


@pytest.fixture
def null_space_ds():
    return Dataset(X=np.array([[0.2, 1.0, 0.0], [0.2, 0.0, -1.0]]), y=np.array([1.0, 1.0]))


@pytest.fixture
def small_problem():
    """n=60, p=20, three strong signals, light noise"""
    return make_problem(60, 20, [1.0, -2.0, 3.0], sigma=0.1, seed=3)


@pytest.fixture
def overdetermined():
    """n=50, p=5, noiseless"""
    return make_problem(50, 5, [1.0, -1.0, 0.5], sigma=0.0, seed=11)


@pytest.fixture
def validation_pair():
    """Train and validation halves of one noisy problem"""
    truth, ds = make_problem(120, 30, [2.0, -1.5, 1.0], sigma=0.3, seed=5)
    train = ds.rows(np.arange(0, 60))
    valid = ds.rows(np.arange(60, 120))
    return truth, train, valid
