"""Shared numeric objects: distributions, kernels, credal sets and budgets.

Kernels and distributions are validated once and then frozen (the backing
arrays are marked read-only).  Nothing is ever renormalized: an input that
misses stochasticity by more than ``STOCHASTIC_TOL`` is rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import (
    DeadColumnError,
    DimensionMismatch,
    DomainError,
    NegativeEntryError,
    RowSumError,
    ValidationError,
)

STOCHASTIC_TOL = 1e-9
# masses below this count as exact zeros for support computations
ZERO_MASS = 1e-15
CREDAL_TOL = 1e-12


class _Infinite(float):
    """Positive infinity as an explicit, identity-comparable result value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls, "inf")
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    __str__ = __repr__

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()


def is_infinite(value) -> bool:
    return value is INFINITE or (isinstance(value, float) and math.isinf(value) and value > 0)


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability vector on an alphabet of size ``N >= 2``."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size < 2:
            raise DimensionMismatch(f"distribution must be a vector of length >= 2, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise ValidationError("distribution has non-finite entries")
        if np.any(probs < 0):
            raise NegativeEntryError(f"negative mass {probs.min()!r}")
        if abs(probs.sum() - 1.0) > STOCHASTIC_TOL:
            raise RowSumError(f"masses sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def size(self) -> int:
        return self.probs.size

    def __len__(self):
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def to_json(self) -> dict:
        return {"probs": self.probs.tolist()}


@dataclass(frozen=True, eq=False)
class StochasticKernel:
    """An ``N x M`` row-stochastic matrix; row ``x`` is the law of ``Y`` given ``X = x``."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_kernel(self.matrix))

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    def row(self, x: int) -> np.ndarray:
        return self.matrix[x]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def to_json(self) -> dict:
        return {"rows": self.matrix.tolist()}


def _check_kernel(raw) -> np.ndarray:
    m = _frozen(raw)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise DimensionMismatch(f"kernel must be N x M with N, M >= 2, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("kernel has non-finite entries")
    if np.any(m < 0):
        x, y = np.argwhere(m < 0)[0]
        raise NegativeEntryError(f"entry ({x}, {y}) is {m[x, y]!r}")
    sums = m.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > STOCHASTIC_TOL)
    if bad.size:
        raise RowSumError(f"row {bad[0]} sums to {sums[bad[0]]!r}")
    dead = np.flatnonzero(np.all(m <= ZERO_MASS, axis=0))
    if dead.size:
        raise DeadColumnError(f"output column {dead[0]} is unreachable")
    return m


KernelLike = Union[StochasticKernel, np.ndarray, list]
DistributionLike = Union[Distribution, np.ndarray, list]


def validate_kernel(raw) -> StochasticKernel:
    """Validate a raw nonnegative matrix as a kernel, accepting it verbatim.

    Raises ``RowSumError``, ``NegativeEntryError`` or ``DeadColumnError``.
    """
    if isinstance(raw, StochasticKernel):
        return raw
    return StochasticKernel(raw)


def as_distribution(raw) -> Distribution:
    if isinstance(raw, Distribution):
        return raw
    return Distribution(raw)


@dataclass(frozen=True)
class CredalSet:
    """Distributions on ``N`` symbols whose smallest mass is at least ``c``."""

    c: float
    n: int

    def __post_init__(self):
        check_c(self.c, self.n)

    @property
    def slack(self) -> float:
        """Mass left over after the floor, ``1 - N c`` (zero for the singleton set)."""
        return credal_slack(self.c, self.n)

    def contains(self, P) -> bool:
        return in_credal_set(P, self.c)

    def point(self, V) -> np.ndarray:
        return credal_point(V, self.c)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        V = rng.dirichlet(np.ones(self.n), size=size)
        return credal_point(V, self.c)


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, c) pair; epsilon in nats."""

    epsilon: float
    c: float

    def __post_init__(self):
        if not (self.epsilon >= 0) or math.isnan(self.epsilon):
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (self.c > 0):
            raise DomainError(f"c must be > 0, got {self.c!r}")

    def check(self, n: int) -> "PrivacyBudget":
        check_c(self.c, n)
        return self


def check_c(c: float, n: int) -> None:
    if n < 2:
        raise DomainError(f"alphabet size must be >= 2, got {n}")
    if not (0 < c <= 1.0 / n + CREDAL_TOL):
        raise DomainError(f"c must lie in (0, 1/N] = (0, {1.0 / n!r}], got {c!r}")


def credal_slack(c: float, n: int) -> float:
    slack = 1.0 - n * c
    # c = 1/N can round to slightly above 1/N
    return 0.0 if slack < CREDAL_TOL else slack


def in_credal_set(P, c: float) -> bool:
    """True iff every mass of ``P`` is at least ``c`` (up to 1e-12)."""
    P = as_distribution(P)
    check_c(c, P.size)
    return bool(P.probs.min() >= c - CREDAL_TOL)


def credal_point(V, c: float) -> np.ndarray:
    """Map simplex points ``V`` (last axis) onto the credal set as ``c + (1 - N c) V``."""
    V = np.asarray(V, dtype=float)
    n = V.shape[-1]
    check_c(c, n)
    return c + credal_slack(c, n) * V


def push_forward(K, P) -> Distribution:
    """Output marginal ``(K o P)(y) = sum_x K(y|x) P(x)``."""
    K = validate_kernel(K)
    P = as_distribution(P)
    if P.size != K.n_inputs:
        raise DimensionMismatch(f"distribution has {P.size} masses, kernel has {K.n_inputs} inputs")
    out = P.probs @ K.matrix
    # float dust can push a zero marginal a hair below 0
    return Distribution(np.clip(out, 0.0, None))


def constant_kernel(row, n: int) -> StochasticKernel:
    return StochasticKernel(np.tile(np.asarray(row, dtype=float), (n, 1)))


def identity_kernel(n: int) -> StochasticKernel:
    return StochasticKernel(np.eye(n))


def load_kernel(path) -> StochasticKernel:
    """Read a ``{"rows": [[...], ...]}`` JSON file."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict) or "rows" not in data:
        raise ValidationError(f"{path}: expected a JSON object with a 'rows' key")
    return validate_kernel(data["rows"])


def load_distribution(path) -> Distribution:
    """Read a ``{"probs": [...]}`` JSON file."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict) or "probs" not in data:
        raise ValidationError(f"{path}: expected a JSON object with a 'probs' key")
    return as_distribution(data["probs"])


def kernel_from_json(text: str) -> StochasticKernel:
    data = json.loads(text)
    if not isinstance(data, dict) or "rows" not in data:
        raise ValidationError("expected a JSON object with a 'rows' key")
    return validate_kernel(data["rows"])


def distribution_from_json(text: str) -> Distribution:
    data = json.loads(text)
    if not isinstance(data, dict) or "probs" not in data:
        raise ValidationError("expected a JSON object with a 'probs' key")
    return as_distribution(data["probs"])
