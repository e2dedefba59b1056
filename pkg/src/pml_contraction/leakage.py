"""Pointwise maximal leakage, LDP and the (epsilon, c)-PML leakage capacity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    INFINITE,
    ZERO_MASS,
    PrivacyBudget,
    as_distribution,
    check_c,
    credal_slack,
    validate_kernel,
)
from .errors import DeadOutcomeError, DimensionMismatch, SupportError

PML_TOL = 1e-12


@dataclass(frozen=True)
class LeakageReport:
    per_outcome: tuple
    capacity: float


def _full_support(K, P):
    K = validate_kernel(K)
    P = as_distribution(P)
    if P.size != K.n_inputs:
        raise DimensionMismatch(f"distribution has {P.size} masses, kernel has {K.n_inputs} inputs")
    if np.any(P.probs <= ZERO_MASS):
        raise SupportError("PML needs a distribution with full support")
    return K, P


def _check_outcome(K, y: int) -> int:
    if not 0 <= y < K.n_outputs:
        raise DimensionMismatch(f"outcome {y} outside 0..{K.n_outputs - 1}")
    return int(y)


def pml_pointwise(K, P, y: int) -> float:
    """PML to outcome ``y``: ``log(max_x K(y|x) / (K o P)(y))``."""
    K, P = _full_support(K, P)
    y = _check_outcome(K, y)
    col = K.matrix[:, y]
    marginal = float(P.probs @ col)
    if marginal <= ZERO_MASS:
        raise DeadOutcomeError(f"outcome {y} has zero probability")
    # max/marginal >= 1 mathematically; clip rounding below zero
    return max(0.0, math.log(col.max() / marginal))


def pml_report(K, P) -> LeakageReport:
    K, P = _full_support(K, P)
    values = tuple(pml_pointwise(K, P, y) for y in range(K.n_outputs))
    return LeakageReport(per_outcome=values, capacity=max(values))


def column_capacities(matrix: np.ndarray, c: float) -> np.ndarray:
    """Per-outcome worst-case PML over the credal set (unvalidated fast path).

    The infimum of the output marginal over ``{P : min P >= c}`` puts mass
    ``c`` everywhere and the slack ``1 - N c`` on the smallest column entry.
    """
    n = matrix.shape[-2]
    slack = credal_slack(c, n)
    denom = c * matrix.sum(axis=-2) + slack * matrix.min(axis=-2)
    return np.log(matrix.max(axis=-2) / denom)


def leakage_capacity(K, c: float) -> float:
    """Local leakage capacity of ``K`` over distributions with minimum mass ``c``.

    Closed form::

        max_y log[ max_x K(y|x) / (c * sum_x K(y|x) + (1 - N c) * min_x K(y|x)) ]

    Finite for every valid kernel because no column is all zeros.
    """
    K = validate_kernel(K)
    check_c(c, K.n_inputs)
    return max(0.0, float(column_capacities(K.matrix, c).max()))


def satisfies_pml(K, budget: PrivacyBudget) -> bool:
    K = validate_kernel(K)
    budget.check(K.n_inputs)
    return leakage_capacity(K, budget.c) <= budget.epsilon + PML_TOL


def ldp(K):
    """Local differential privacy level ``sup_y sup_{x,x'} log K(y|x)/K(y|x')``.

    INFINITE exactly when some column mixes zero and positive entries.
    """
    K = validate_kernel(K)
    m = K.matrix
    lo = m.min(axis=0)
    hi = m.max(axis=0)
    if np.any(lo <= ZERO_MASS):
        return INFINITE
    return max(0.0, float(np.max(np.log(hi / lo))))


def max_zeros_per_column(budget: PrivacyBudget, n: int) -> int:
    """Largest number of zeros a column of an (epsilon, c)-PML kernel can hold.

    A column with ``z >= 1`` zeros forces leakage at least ``-log((N - z) c)``,
    so ``z`` is allowed iff ``(N - z) c >= exp(-epsilon)``; equality counts as
    allowed.
    """
    budget.check(n)
    floor = math.exp(-budget.epsilon)
    best = 0
    for z in range(1, n):
        if (n - z) * budget.c >= floor * (1 - PML_TOL):
            best = z
    return best


def subset_disclosure_floor(K, P, y: int) -> float:
    """``-log P(X_sub)`` where ``X_sub`` are the inputs that can emit ``y``.

    Observing ``y`` proves ``X`` lies in ``X_sub``, which costs at least this
    much leakage.
    """
    K, P = _full_support(K, P)
    y = _check_outcome(K, y)
    support = K.matrix[:, y] > ZERO_MASS
    if not support.any():
        raise DeadOutcomeError(f"outcome {y} has zero probability")
    mass = float(P.probs[support].sum())
    return max(0.0, -math.log(min(mass, 1.0)))

