"""f-divergences between discrete distributions.

All logarithms are natural.  Zero-mass conventions follow the usual
perspective-function limits: a term with ``Q(x) = 0 < P(x)`` contributes
``P(x)`` times the generator's slope at infinity, and ``0 * f(0/0)`` is 0.
Results that are infinite come back as :data:`~pml_contraction.core.INFINITE`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import INFINITE, as_distribution
from .errors import DimensionMismatch, GeneratorError

TV = "TV"
KL = "KL"
HELLINGER_SQ = "HellingerSq"
CHI_SQ = "ChiSq"
GENERIC = "Generic"

KINDS = (TV, KL, HELLINGER_SQ, CHI_SQ, GENERIC)


@dataclass(frozen=True)
class DivergenceSpec:
    """Which f-divergence to evaluate.

    For ``kind == "Generic"`` the caller supplies the generator ``f`` together
    with ``f(0+)`` and ``lim f(t)/t`` as ``t -> inf``.  Convexity is the
    caller's responsibility; only ``f(1) = 0`` is checked.
    """

    kind: str
    generator: Optional[Callable[[float], float]] = None
    f_at_zero: Optional[float] = None
    slope_at_infinity: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GeneratorError(f"unknown divergence kind {self.kind!r}")
        if self.kind == GENERIC:
            if self.generator is None or self.f_at_zero is None or self.slope_at_infinity is None:
                raise GeneratorError("generic divergences need generator, f_at_zero and slope_at_infinity")
            if abs(self.generator(1.0)) > 1e-12:
                raise GeneratorError(f"generator must vanish at 1, got f(1) = {self.generator(1.0)!r}")

    def f(self, t: float) -> float:
        """Evaluate the generator at ``t > 0``."""
        if self.kind == GENERIC:
            return float(self.generator(t))
        return _BUILTIN_GENERATORS[self.kind](t)

    @property
    def name(self) -> str:
        return self.kind

    @classmethod
    def generic(cls, f, f_at_zero: float, slope_at_infinity: float) -> "DivergenceSpec":
        return cls(GENERIC, f, float(f_at_zero), float(slope_at_infinity))

    def as_generic(self) -> "DivergenceSpec":
        """The same divergence routed through the generic evaluator."""
        if self.kind == GENERIC:
            return self
        f0, slope = _BUILTIN_LIMITS[self.kind]
        return DivergenceSpec.generic(_BUILTIN_GENERATORS[self.kind], f0, slope)


def _xlogx(t):
    return t * math.log(t) if t > 0 else 0.0


_BUILTIN_GENERATORS = {
    TV: lambda t: 0.5 * abs(1.0 - t),
    KL: _xlogx,
    HELLINGER_SQ: lambda t: (1.0 - math.sqrt(t)) ** 2,
    CHI_SQ: lambda t: (t - 1.0) ** 2,
}

# (f(0+), lim f(t)/t)
_BUILTIN_LIMITS = {
    TV: (0.5, 0.5),
    KL: (0.0, math.inf),
    HELLINGER_SQ: (1.0, 1.0),
    CHI_SQ: (1.0, math.inf),
}

TV_SPEC = DivergenceSpec(TV)
KL_SPEC = DivergenceSpec(KL)
HELLINGER_SPEC = DivergenceSpec(HELLINGER_SQ)
CHI_SQ_SPEC = DivergenceSpec(CHI_SQ)

_ALIASES = {
    "tv": TV_SPEC,
    "kl": KL_SPEC,
    "h2": HELLINGER_SPEC,
    "hellinger": HELLINGER_SPEC,
    "chi2": CHI_SQ_SPEC,
}


def spec_from_name(name: str) -> DivergenceSpec:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise GeneratorError(f"unknown divergence {name!r}; choose from {sorted(_ALIASES)}") from None


def _pair(P, Q):
    p = as_distribution(P).probs
    q = as_distribution(Q).probs
    if p.shape != q.shape:
        raise DimensionMismatch(f"distributions have sizes {p.size} and {q.size}")
    return p, q


def _extended(value: float):
    return INFINITE if math.isinf(value) else float(value)


# Batched kernels: rows of P and Q are paired.  They return IEEE inf where the
# divergence is infinite; the public wrappers convert that to INFINITE.

def tv_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return 0.5 * np.abs(P - Q).sum(axis=-1)


def kl_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    pos = P > 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        terms = np.where(pos, P * np.log(np.where(pos, P, 1.0) / Q), 0.0)
    out = terms.sum(axis=-1)
    broken = np.any(pos & (Q <= 0.0), axis=-1)
    return np.where(broken, np.inf, np.maximum(out, 0.0))


def hellinger_sq_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return ((np.sqrt(P) - np.sqrt(Q)) ** 2).sum(axis=-1)


def chi_sq_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    qpos = Q > 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        terms = np.where(qpos, (P - Q) ** 2 / np.where(qpos, Q, 1.0), 0.0)
    out = terms.sum(axis=-1)
    broken = np.any(~qpos & (P > 0.0), axis=-1)
    return np.where(broken, np.inf, out)


_ROW_FUNCS = {TV: tv_rows, KL: kl_rows, HELLINGER_SQ: hellinger_sq_rows, CHI_SQ: chi_sq_rows}


def _generic_value(spec: DivergenceSpec, p: np.ndarray, q: np.ndarray) -> float:
    total = 0.0
    for px, qx in zip(p, q):
        if qx > 0.0:
            total += qx * (spec.f(px / qx) if px > 0.0 else spec.f_at_zero)
        elif px > 0.0:
            if math.isinf(spec.slope_at_infinity):
                return math.inf
            total += px * spec.slope_at_infinity
    return total


def divergence_rows(spec: DivergenceSpec, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Evaluate ``D_f(P[i] || Q[i])`` for every row pair; infinite values are ``np.inf``."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if spec.kind in _ROW_FUNCS:
        return _ROW_FUNCS[spec.kind](P, Q)
    return np.array([_generic_value(spec, p, q) for p, q in zip(P, Q)])


def tv(P, Q) -> float:
    """Total variation distance ``0.5 * sum |P - Q|``."""
    p, q = _pair(P, Q)
    return float(tv_rows(p, q))


def kl(P, Q):
    """Relative entropy ``D(P || Q)`` in nats; INFINITE unless ``P << Q``."""
    p, q = _pair(P, Q)
    return _extended(kl_rows(p, q))


def hellinger_sq(P, Q) -> float:
    """Squared Hellinger divergence ``sum (sqrt P - sqrt Q)^2``, in [0, 2]."""
    p, q = _pair(P, Q)
    return float(hellinger_sq_rows(p, q))


def chi_sq(P, Q):
    """Pearson chi-squared divergence ``sum (P - Q)^2 / Q``."""
    p, q = _pair(P, Q)
    return _extended(chi_sq_rows(p, q))


def f_div(spec: DivergenceSpec, P, Q):
    """``E_Q[f(dP/dQ)]`` with the zero-mass conventions from the module docstring."""
    p, q = _pair(P, Q)
    if spec.kind == TV:
        return tv(p, q)
    if spec.kind == KL:
        return kl(p, q)
    if spec.kind == HELLINGER_SQ:
        return hellinger_sq(p, q)
    if spec.kind == CHI_SQ:
        return chi_sq(p, q)
    return _extended(_generic_value(spec, p, q))
