import numpy as np
import pytest

from loewnerfit.data import FrequencySample


def closed_form(f, points):
    """Samples of a scalar closed-form function."""
    return [FrequencySample(s, [[f(s)]]) for s in points]


def inv1(s):
    return 1.0 / (s + 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tangential_errors(model, ds):
    """Largest relative mismatch of the left and right tangential conditions."""
    err = 0.0
    for j, mu in enumerate(ds.left_points):
        got = ds.left_directions[j] @ model(mu)
        ref = ds.left_responses[j]
        err = max(err, np.linalg.norm(got - ref) / max(np.linalg.norm(ref), 1e-300))
    for i, lam in enumerate(ds.right_points):
        got = model(lam) @ ds.right_directions[:, i]
        ref = ds.right_responses[:, i]
        err = max(err, np.linalg.norm(got - ref) / max(np.linalg.norm(ref), 1e-300))
    return err


def max_rel_error(f, g, points):
    """Largest pointwise relative Frobenius error of ``g`` against ``f``."""
    return max(np.linalg.norm(f(s) - g(s)) / np.linalg.norm(f(s)) for s in points)
