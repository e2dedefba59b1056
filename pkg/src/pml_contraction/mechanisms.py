"""Optimal binary-output mechanisms, feasibility functionals and kernel samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    PrivacyBudget,
    StochasticKernel,
    check_c,
    credal_slack,
    validate_kernel,
)
from .bounds import regime_threshold
from .errors import DomainError, ExhaustedError, InfeasibleQ, RegimeError, ValidationError
from .leakage import PML_TOL, column_capacities

BISECTION_STEPS = 40
LINEAR_SCAN_STEPS = 1000


@dataclass(frozen=True)
class BinaryMechanismSpec:
    n: int
    epsilon: float
    c: float
    q: int = 1

    @property
    def denominator(self) -> float:
        return 1.0 + math.exp(self.epsilon) * credal_slack(self.c, self.n)

    @property
    def low(self) -> float:
        return (1.0 - math.exp(self.epsilon) * self.c * self.q) / self.denominator

    @property
    def high(self) -> float:
        return math.exp(self.epsilon) * (1.0 - self.c * self.q) / self.denominator

    def is_feasible(self) -> bool:
        return 0.0 < self.low <= self.high < 1.0


def feasible_qs(n: int, epsilon: float, c: float) -> list:
    """Values of ``q`` for which the two-level construction stays strictly inside (0, 1)."""
    return [q for q in range(1, n) if BinaryMechanismSpec(n, epsilon, c, q).is_feasible()]


def construct_optimal(n: int, epsilon: float, c: float, q: Optional[int] = None) -> StochasticKernel:
    """Binary-output kernel with the largest Dobrushin coefficient under (epsilon, c)-PML.

    The first column holds ``q`` copies of ``M`` followed by ``N - q`` copies
    of ``m``, where::

        m = (1 - e^eps c q) / (1 + e^eps (1 - N c))
        M = e^eps (1 - c q) / (1 + e^eps (1 - N c))

    Its coefficient ``M - m = (e^eps - 1) / (e^eps (1 - N c) + 1)`` does not
    depend on ``q``.  With ``q=None`` the smallest feasible ``q`` is used; an
    explicit ``q`` that pushes ``m`` to 0 or ``M`` to 1 raises ``InfeasibleQ``.
    For odd ``N`` close to the threshold no ``q`` works.
    """
    check_c(c, n)
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    if epsilon >= regime_threshold(c, n):
        raise RegimeError(f"epsilon={epsilon!r} is not below log(2/(N c)) = {regime_threshold(c, n)!r}")
    if q is None:
        options = feasible_qs(n, epsilon, c)
        if not options:
            raise InfeasibleQ(f"no q in 1..{n - 1} gives entries inside (0, 1) at N={n}, eps={epsilon!r}, c={c!r}")
        q = options[0]
    if not 1 <= q <= n - 1:
        raise InfeasibleQ(f"q must lie in 1..{n - 1}, got {q}")
    spec = BinaryMechanismSpec(n, epsilon, c, q)
    if not spec.is_feasible():
        raise InfeasibleQ(f"q={q} gives m={spec.low!r}, M={spec.high!r}; need 0 < m <= M < 1")
    first = np.array([spec.high] * q + [spec.low] * (n - q))
    return StochasticKernel(np.column_stack([first, 1.0 - first]))


def binary_optimal(epsilon: float, c: float) -> StochasticKernel:
    """The symmetric 2x2 optimum; reduces to randomized response as ``c -> 0``."""
    check_c(c, 2)
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    if epsilon >= -math.log(c):
        raise RegimeError(f"need epsilon < log(1/c) = {-math.log(c)!r}, got {epsilon!r}")
    e = math.exp(epsilon)
    den = e * (1.0 - 2.0 * c) + 1.0
    keep = e * (1.0 - c) / den
    flip = (1.0 - e * c) / den
    return StochasticKernel([[keep, flip], [flip, keep]])


def saturating_mechanism(n: int) -> StochasticKernel:
    """Binary kernel whose last two inputs have disjoint output supports.

    First column ``(1/2, ..., 1/2, 1, 0)``.  Its leakage capacity is exactly
    ``log(2/(N c))``, and it does not contract for any smooth f.
    """
    if n < 2:
        raise DomainError("need N >= 2")
    first = np.array([0.5] * (n - 2) + [1.0, 0.0])
    return StochasticKernel(np.column_stack([first, 1.0 - first]))


@dataclass(frozen=True)
class Feasibility:
    f1: float
    f2: float
    feasible: bool


def _f(p: np.ndarray, e: float, c: float) -> np.ndarray:
    n = p.shape[-1]
    return p.max(axis=-1) - e * (c * p.sum(axis=-1) + credal_slack(c, n) * p.min(axis=-1))


def feasibility_rows(p: np.ndarray, epsilon: float, c: float):
    """Vectorised ``(F1, F2)`` for each row of ``p``."""
    e = math.exp(epsilon)
    return _f(p, e, c), _f(1.0 - p, e, c)


def feasibility(p, epsilon: float, c: float) -> Feasibility:
    """Linear constraints describing ``[p, 1 - p]`` as an (epsilon, c)-PML kernel.

    ``F1(p) = max p - e^eps (c sum p + (1 - N c) min p)`` and ``F2`` is the same
    expression on ``1 - p``.  The kernel is private iff both are <= 0.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DomainError("p must be a vector of length >= 2")
    if np.any(p < 0) or np.any(p > 1):
        raise DomainError("entries of p must lie in [0, 1]")
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    check_c(c, p.size)
    f1, f2 = feasibility_rows(p, epsilon, c)
    return Feasibility(float(f1), float(f2), bool(f1 <= PML_TOL and f2 <= PML_TOL))


def perturb_off_zero(p, lam: float) -> np.ndarray:
    """Lift the single zero entry of ``p`` to ``lam``, paying ``lam/(N-1)`` from every other entry.

    This keeps the sum fixed and maps a one-zero feasible vector to a strictly
    positive feasible one whose spread shrinks by ``lam N / (N - 1)``.
    """
    p = np.array(p, dtype=float)
    zeros = np.flatnonzero(p == 0.0)
    if zeros.size != 1:
        raise DomainError(f"p must have exactly one zero, found {zeros.size}")
    n = p.size
    out = p - lam / (n - 1)
    out[zeros[0]] = lam
    if np.any(out < 0):
        raise DomainError("lam too large for the smallest positive entry")
    return out


def _exact_reference():
    k1 = [[Fraction(15, 16), Fraction(1, 16)]] * 5 + [[Fraction(1, 16), Fraction(15, 16)]] * 5
    third = Fraction(1, 3)
    k2 = []
    for x in range(5):
        row = [Fraction(0)] * 5
        for k in range(3):
            row[(x + k) % 5] = third
        k2.append(row)
    return {"K1": k1, "K2": k2}


def reference_kernels() -> dict:
    """The two worked-example kernels: ``K1`` (10 x 2) and ``K2`` (5 x 5 circulant)."""
    return {
        name: StochasticKernel(np.array([[float(v) for v in row] for row in rows]))
        for name, rows in _exact_reference().items()
    }


def _mix(matrix: np.ndarray, average: np.ndarray, lam: float) -> np.ndarray:
    if lam >= 1.0:
        return np.tile(average, (matrix.shape[0], 1))
    return (1.0 - lam) * matrix + lam * average[None, :]


def _private(matrix: np.ndarray, epsilon: float, c: float) -> bool:
    return float(column_capacities(matrix, c).max()) <= epsilon + PML_TOL


def mix_to_budget(K, budget: PrivacyBudget) -> tuple:
    """Smallest mix toward the column-average row that meets the budget.

    Returns ``(kernel, lam)``.  Leakage capacity is non-increasing in ``lam``
    along this path, so bisection applies; if a bisection step ever finds the
    bracket inverted, a linear scan over ``lam`` takes over.
    """
    K = validate_kernel(K)
    budget.check(K.n_inputs)
    m = K.matrix
    eps, c = budget.epsilon, budget.c
    average = m.mean(axis=0)
    if _private(m, eps, c):
        return K, 0.0
    if eps == 0.0:
        return StochasticKernel(_mix(m, average, 1.0)), 1.0
    lo, hi = 0.0, 1.0
    cap_lo = float(column_capacities(m, c).max())
    monotone = True
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        cap_mid = float(column_capacities(_mix(m, average, mid), c).max())
        if cap_mid > cap_lo + PML_TOL:
            monotone = False
            break
        if cap_mid <= eps + PML_TOL:
            hi = mid
        else:
            lo, cap_lo = mid, cap_mid
    if not monotone:
        hi = 1.0
        for lam in np.linspace(0.0, 1.0, LINEAR_SCAN_STEPS + 1):
            if _private(_mix(m, average, lam), eps, c):
                hi = float(lam)
                break
    return StochasticKernel(_mix(m, average, hi)), hi


def sample_kernel(n: int, m: int, budget: PrivacyBudget, rng_seed: int = 0,
                  max_tries: int = 100) -> StochasticKernel:
    """Draw Dirichlet(1) rows and mix them toward the average row until the budget holds.

    Deterministic given ``rng_seed``.  Draws with an unreachable output column
    are discarded; ``ExhaustedError`` after ``max_tries`` of them.
    """
    if m < 2:
        raise DomainError(f"need at least two outputs, got {m}")
    budget.check(n)
    rng = np.random.default_rng(rng_seed)
    for _ in range(max_tries):
        raw = rng.dirichlet(np.ones(m), size=n)
        try:
            K = StochasticKernel(raw)
        except ValidationError:
            continue
        return mix_to_budget(K, budget)[0]
    raise ExhaustedError(f"no usable kernel after {max_tries} draws")
