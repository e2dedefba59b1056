"""Contraction coefficients of kernels.

``dobrushin`` is exact.  ``empirical_eta_f`` and ``eta_chi2`` are seeded
searches that return certified *lower* estimates together with the Dobrushin
coefficient as an analytic cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .core import (
    ZERO_MASS,
    Distribution,
    StochasticKernel,
    as_distribution,
    check_c,
    credal_slack,
    validate_kernel,
)
from .divergences import TV_SPEC, DivergenceSpec, divergence_rows, tv_rows
from .errors import DimensionMismatch, DomainError, SearchConfigError, SizeError

MIN_INPUT_TV = 1e-6
VERTEX_FRACTION = 0.3
VERTEX_SMOOTHING = 1e-3
REFINED_CANDIDATES = 8
POWER_TOL = 1e-10
BINARIZE_TIE = 1e-15
POWER_MAX_ITER = 10_000


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 200
    refine_rounds: int = 50
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.restarts, (int, np.integer)) or self.restarts < 1:
            raise SearchConfigError(f"restarts must be a positive integer, got {self.restarts!r}")
        if not isinstance(self.refine_rounds, (int, np.integer)) or self.refine_rounds < 0:
            raise SearchConfigError(f"refine_rounds must be a nonnegative integer, got {self.refine_rounds!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise SearchConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def rng(self, index: int) -> np.random.Generator:
        """Independent stream for restart ``index``; results never depend on scheduling."""
        return np.random.default_rng([int(self.seed), int(index)])


@dataclass(frozen=True)
class ContractionEstimate:
    """Search result: ``lower`` is attained by ``witness_pair``, ``upper`` is the Dobrushin cap."""

    lower: float
    witness_pair: Optional[tuple]
    upper: float
    iterations: int = 0
    meta: dict = field(default_factory=dict)


def dobrushin(K) -> float:
    """Largest total variation distance between two rows of ``K``."""
    m = validate_kernel(K).matrix
    # 1 - overlap is exact for disjoint rows, where half the L1 norm can round to 1 - 1e-16
    overlap = np.minimum(m[:, None, :], m[None, :, :]).sum(axis=-1)
    return float(min(1.0, max(0.0, 1.0 - overlap.min())))


def is_decomposable(K):
    """Look for two inputs whose output supports are disjoint.

    Returns ``(True, (x, x'))`` for the first such pair, else ``(False, None)``.
    """
    support = validate_kernel(K).matrix > ZERO_MASS
    n = support.shape[0]
    for x in range(n):
        for x2 in range(x + 1, n):
            if not np.any(support[x] & support[x2]):
                return True, (x, x2)
    return False, None


def binarize(K, P, Q) -> StochasticKernel:
    """Collapse the outputs of ``K`` onto the event where ``K o P`` beats ``K o Q``.

    Column 0 of the result is that event, column 1 its complement.  The TV
    distance between the two output laws is unchanged.  When ``K o P`` equals
    ``K o Q`` (to within 1e-15 per output) there is no such event; output 0
    alone is used instead, which yields the constant collapse for constant
    kernels and keeps both columns reachable.
    """
    K = validate_kernel(K)
    p = as_distribution(P).probs
    q = as_distribution(Q).probs
    if p.size != K.n_inputs or q.size != K.n_inputs:
        raise DimensionMismatch("distributions do not match the kernel input size")
    # differences at rounding level are ties; otherwise a constant kernel can
    # put every output in the event
    event = (p @ K.matrix) - (q @ K.matrix) > BINARIZE_TIE
    if not event.any() or event.all():
        event = np.zeros(K.n_outputs, dtype=bool)
        event[0] = True
    first = K.matrix[:, event].sum(axis=1)
    rest = K.matrix[:, ~event].sum(axis=1)
    return StochasticKernel(np.column_stack([first, rest]))


# -- exhaustive oracle --------------------------------------------------------

@lru_cache(maxsize=32)
def _compositions(parts: int, total: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total + 1):
        rest = _compositions(parts - 1, total - first)
        blocks.append(np.column_stack([np.full(len(rest), first), rest]))
    return np.vstack(blocks)


def simplex_grid(n: int, step: float) -> np.ndarray:
    """All points of the probability simplex on ``n`` symbols with masses in multiples of ``step``."""
    total = int(round(1.0 / step))
    return _compositions(n, total) / total


def brute_force_eta_tv(K, grid_step: float = 0.01) -> float:
    """Grid-search the TV contraction ratio over pairs of simplex points.

    Only pairs with disjoint supports are enumerated: removing the common part
    ``min(P, Q)`` and renormalising leaves the ratio unchanged.
    """
    K = validate_kernel(K)
    n = K.n_inputs
    if n > 4:
        raise SizeError(f"brute force is limited to N <= 4, got {n}")
    if not 1e-3 <= grid_step <= 0.1:
        raise DomainError(f"grid_step must lie in [1e-3, 0.1], got {grid_step!r}")
    best = 0.0
    others = list(range(1, n))
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            left = [0, *extra]
            right = [x for x in range(n) if x not in left]
            if not right:
                continue
            A = simplex_grid(len(left), grid_step) @ K.matrix[left]
            B = simplex_grid(len(right), grid_step) @ K.matrix[right]
            chunk = max(1, 2_000_000 // (len(B) * K.n_outputs))
            for start in range(0, len(A), chunk):
                block = A[start:start + chunk]
                ratios = 0.5 * np.abs(block[:, None, :] - B[None, :, :]).sum(axis=-1)
                best = max(best, float(ratios.max()))
    return best


# -- seeded searches ----------------------------------------------------------

def _vertex_pairs(n: int):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _smoothed_vertex(n: int, i: int) -> np.ndarray:
    v = np.full(n, VERTEX_SMOOTHING / n)
    v[i] += 1.0 - VERTEX_SMOOTHING
    return v


def _initial_pairs(n: int, search: SearchConfig):
    n_vertex = int(round(VERTEX_FRACTION * search.restarts))
    pairs = _vertex_pairs(n)
    V, W = [], []
    for r in range(search.restarts):
        if r < search.restarts - n_vertex:
            rng = search.rng(r)
            V.append(rng.dirichlet(np.ones(n)))
            W.append(rng.dirichlet(np.ones(n)))
        else:
            i, j = pairs[(r - (search.restarts - n_vertex)) % len(pairs)]
            V.append(_smoothed_vertex(n, i))
            W.append(_smoothed_vertex(n, j))
    return np.array(V), np.array(W)


class _RatioObjective:
    def __init__(self, K: StochasticKernel, spec: DivergenceSpec, c: Optional[float]):
        self.matrix = K.matrix
        self.spec = spec
        self.c = c
        self.slack = 1.0 if c is None else credal_slack(c, K.n_inputs)

    def points(self, V):
        return V if self.c is None else self.c + self.slack * V

    def __call__(self, V, W) -> np.ndarray:
        P, Q = self.points(V), self.points(W)
        den = divergence_rows(self.spec, P, Q)
        num = divergence_rows(self.spec, P @ self.matrix, Q @ self.matrix)
        ok = (tv_rows(P, Q) >= MIN_INPUT_TV) & np.isfinite(den) & (den > 0) & np.isfinite(num)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(ok, num / np.where(ok, den, 1.0), -np.inf)


def _toward_vertices(x: np.ndarray, step: float) -> np.ndarray:
    """Row ``i`` is ``(1 - step) x + step e_i``."""
    n = x.size
    return (1.0 - step) * x[None, :] + step * np.eye(n)


def _refine_pair(objective, V, W, value, rounds):
    n = V.size
    step = 0.5
    used = 0
    for _ in range(rounds):
        used += 1
        cand_V = np.vstack([_toward_vertices(V, step), np.tile(V, (n, 1))])
        cand_W = np.vstack([np.tile(W, (n, 1)), _toward_vertices(W, step)])
        scores = objective(cand_V, cand_W)
        k = int(np.argmax(scores))
        if scores[k] > value + 1e-12 * max(1.0, abs(value)):
            V, W, value = cand_V[k], cand_W[k], float(scores[k])
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return V, W, value, used


def empirical_eta_f(K, spec: DivergenceSpec = TV_SPEC, c: Optional[float] = None,
                    search: Optional[SearchConfig] = None) -> ContractionEstimate:
    """Lower-estimate ``sup D_f(K o P, K o Q) / D_f(P, Q)`` by seeded search.

    With ``c`` given, ``P`` and ``Q`` range over the credal set, parameterised
    as ``c + (1 - N c) V`` with ``V`` on the full simplex.  Restarts mix
    Dirichlet(1) draws with smoothed vertex pairs; the best few are polished
    by coordinate ascent with step halving.
    """
    K = validate_kernel(K)
    search = search or SearchConfig()
    n = K.n_inputs
    if c is not None:
        check_c(c, n)
        if credal_slack(c, n) == 0.0:
            raise DomainError("c = 1/N leaves a single distribution; no pairs to compare")
    objective = _RatioObjective(K, spec, c)
    V, W = _initial_pairs(n, search)
    scores = objective(V, W)
    upper = dobrushin(K)
    order = np.argsort(-scores, kind="stable")[:REFINED_CANDIDATES]
    best = (-np.inf, None, None)
    iterations = 0
    for idx in order:
        if not np.isfinite(scores[idx]):
            continue
        v, w, value, used = _refine_pair(objective, V[idx], W[idx], float(scores[idx]), search.refine_rounds)
        iterations += used
        if value > best[0]:
            best = (value, v, w)
    if best[1] is None:
        return ContractionEstimate(0.0, None, upper, iterations, {"divergence": spec.name, "c": c})
    P, Q = objective.points(best[1]), objective.points(best[2])
    # eta_f <= eta_TV for every convex f; the excess is rounding in near-equal pairs
    return ContractionEstimate(
        lower=min(upper, max(0.0, best[0])),
        witness_pair=(Distribution(P), Distribution(Q)),
        upper=upper,
        iterations=iterations,
        meta={"divergence": spec.name, "c": c},
    )


def _deflated_gram(matrix: np.ndarray, p: np.ndarray):
    py = p @ matrix
    keep = py > ZERO_MASS
    B = np.sqrt(p)[:, None] * matrix[:, keep] / np.sqrt(py[keep])[None, :]
    top = np.sqrt(py[keep])
    return B.T @ B - np.outer(top, top)


def second_singular_value_sq(gram: np.ndarray) -> float:
    """Largest eigenvalue of a deflated PSD Gram matrix by power iteration."""
    m = gram.shape[0]
    if m < 2 or not np.any(np.abs(gram) > 1e-15):
        return 0.0
    v = np.random.default_rng(0x5EED).standard_normal(m)
    v /= np.linalg.norm(v)
    value = 0.0
    for _ in range(POWER_MAX_ITER):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        new_value = float(v @ w)
        v = w / norm
        if abs(new_value - value) <= POWER_TOL:
            value = new_value
            break
        value = new_value
    return float(min(1.0, max(0.0, value)))


def maximal_correlation_sq(K, P) -> float:
    """Squared maximal correlation of ``(X, Y)`` with ``X ~ P`` and ``Y | X ~ K``.

    This is the second singular value, squared, of
    ``B[x, y] = sqrt(P(x)) K(y|x) / sqrt((K o P)(y))``.  The top singular pair
    is known in closed form, so it is deflated and the rest found by power
    iteration.
    """
    K = validate_kernel(K)
    p = as_distribution(P).probs
    if p.size != K.n_inputs:
        raise DimensionMismatch("distribution does not match the kernel input size")
    return second_singular_value_sq(_deflated_gram(K.matrix, p))


def eta_chi2(K, search: Optional[SearchConfig] = None) -> ContractionEstimate:
    """Lower-estimate the chi-squared contraction coefficient as ``sup_P rho_m^2``.

    Candidates are the uniform law, two-point laws on every input pair (these
    reach 1 on decomposable kernels) and Dirichlet(1) draws; the best two are
    refined by coordinate ascent.  ``witness_pair`` holds the maximising input
    law and its output law.
    """
    K = validate_kernel(K)
    search = search or SearchConfig()
    n = K.n_inputs
    m = K.matrix
    candidates = [np.full(n, 1.0 / n)]
    for i, j in itertools.combinations(range(n), 2):
        if len(candidates) >= max(1, search.restarts // 2):
            break
        p = np.zeros(n)
        p[[i, j]] = 0.5
        candidates.append(p)
    r = 0
    while len(candidates) < search.restarts:
        candidates.append(search.rng(r).dirichlet(np.ones(n)))
        r += 1
    scores = np.array([second_singular_value_sq(_deflated_gram(m, p)) for p in candidates])
    iterations = 0
    best_value, best_p = -1.0, None
    for idx in np.argsort(-scores, kind="stable")[:2]:
        p, value = candidates[idx], float(scores[idx])
        step = 0.5
        for _ in range(search.refine_rounds):
            iterations += 1
            if value >= 1.0:
                break
            moves = _toward_vertices(p, step)
            vals = np.array([second_singular_value_sq(_deflated_gram(m, q)) for q in moves])
            k = int(np.argmax(vals))
            if vals[k] > value + 1e-13:
                p, value = moves[k], float(vals[k])
            else:
                step *= 0.5
                if step < 1e-9:
                    break
        if value > best_value:
            best_value, best_p = value, p
    P = Distribution(best_p)
    return ContractionEstimate(
        lower=best_value,
        witness_pair=(P, Distribution(np.clip(best_p @ m, 0.0, None))),
        upper=dobrushin(K),
        iterations=iterations,
        meta={"divergence": "ChiSq"},
    )
