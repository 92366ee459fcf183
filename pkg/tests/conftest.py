"""Shared fixtures and matrix generators for the test suite."""

import numpy as np
import pytest


def lowrank_noise(m, n, rank, noise, rng):
    """Random rank-`rank` signal plus i.i.d. Gaussian noise of scale `noise`."""
    signal = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))
    return signal + noise * rng.standard_normal((m, n))


def random_orthonormal(n, k, rng):
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
