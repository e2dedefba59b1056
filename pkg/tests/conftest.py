"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the library's closed forms: they grid or
enumerate, so agreement is evidence rather than tautology.
"""

import itertools
import math

import numpy as np
import pytest

from pml_contraction import reference_kernels
from pml_contraction.contraction import simplex_grid


@pytest.fixture(scope="session")
def refs():
    return reference_kernels()


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def random_kernel(rng, n, m, zero_prob=0.0):
    """Dirichlet rows, optionally with entries knocked to zero; every column stays reachable."""
    while True:
        K = rng.dirichlet(np.ones(m), size=n)
        if zero_prob:
            mask = rng.random((n, m)) < zero_prob
            K = np.where(mask, 0.0, K)
            sums = K.sum(axis=1, keepdims=True)
            if np.any(sums == 0):
                continue
            K = K / sums
        if np.all(K.max(axis=0) > 0):
            return K


def grid_capacity(K, c, step=0.005):
    """max over y and a simplex grid of P = c + (1 - N c) V of log(max_x K / (P K))."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    V = simplex_grid(n, step)
    P = c + (1.0 - n * c) * V
    marg = P @ K
    return float(np.max(np.log(K.max(axis=0)[None, :] / marg)))


def pairwise_tv_loop(K):
    """Dobrushin by explicit double loop."""
    K = np.asarray(K, dtype=float)
    best = 0.0
    for a, b in itertools.combinations(range(K.shape[0]), 2):
        best = max(best, 0.5 * sum(abs(u - v) for u, v in zip(K[a], K[b])))
    return best


def kl_loop(p, q):
    total = 0.0
    for a, b in zip(p, q):
        if a == 0:
            continue
        if b == 0:
            return math.inf
        total += a * math.log(a / b)
    return total
