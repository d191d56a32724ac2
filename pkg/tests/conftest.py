"""Shared fixtures: the bundled dataset and censored-sample factories."""
import numpy as np
import pytest

from chencensor.censoring import CensoringPlan, classify, simulate_experiment
from chencensor.chen import ChenParams
from chencensor.datasets import load_builtin


@pytest.fixture(scope="session")
def devices30():
    return load_builtin("devices30")


@pytest.fixture(scope="session")
def base_plan():
    """n=10 units, m=3 target failures, removals at every failure."""
    return CensoringPlan(n=10, m=3, removals=(2, 2, 3), t1=4.0, t2=10.0)


@pytest.fixture(scope="session")
def sample_case1(base_plan):
    return classify(np.array([1.0, 2.0, 3.0]), base_plan)


@pytest.fixture(scope="session")
def sample_case2(base_plan):
    return classify(np.array([1.0, 2.0, 4.5]), base_plan)


@pytest.fixture(scope="session")
def sample_case3(base_plan):
    return classify(np.array([1.0, 2.0]), base_plan)


@pytest.fixture(scope="session")
def all_case_samples(sample_case1, sample_case2, sample_case3):
    return (sample_case1, sample_case2, sample_case3)


def random_censored_sample(rng, min_failures=2):
    """One simulated experiment under a randomized plan and parameters.

    Draws until the realization carries at least `min_failures` distinct
    failure times so likelihood-based code is well defined.
    """
    while True:
        n = int(rng.integers(10, 40))
        m = int(rng.integers(max(3, n // 4), n + 1))
        removals = rng.multinomial(n - m, np.ones(m) / m)
        params = ChenParams(float(rng.uniform(0.05, 1.5)), float(rng.uniform(0.3, 1.8)))
        t1 = float(rng.uniform(0.3, 2.0))
        t2 = t1 + float(rng.uniform(0.5, 4.0))
        plan = CensoringPlan(n=n, m=m, removals=tuple(int(r) for r in removals),
                             t1=t1, t2=t2)
        s = simulate_experiment(plan, params, rng)
        if s.d2 >= min_failures and np.unique(s.times).size >= min_failures:
            return s, params
