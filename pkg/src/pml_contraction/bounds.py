"""Closed-form contraction and divergence bounds under (epsilon, c)-PML.

Every bound takes the alphabet size ``N`` explicitly so curves can be
evaluated without building a mechanism.  The ``*_eta_bound`` / ``duchi``
functions are external LDP baselines kept for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import check_c, credal_slack
from .divergences import HELLINGER_SQ, KL, DivergenceSpec
from .errors import DomainError, GeneratorError, SaturationError

CONTRACTIVE = "contractive"
SATURATED = "saturated"
GUARD_STEPS = 4


@dataclass(frozen=True)
class BoundReport:
    value: float
    regime: str
    components: dict = field(default_factory=dict)
    flags: tuple = ()

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "regime": self.regime,
            "components": self.components,
            "flags": list(self.flags),
        }


def _check(epsilon: float, c: float, n: int) -> None:
    if not epsilon >= 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    check_c(c, n)


def _check_delta(delta: float) -> None:
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")


def xi(epsilon: float, c: float, n: int) -> float:
    """Largest Dobrushin coefficient of an (epsilon, c)-PML kernel on ``N`` inputs.

    ``min{(e^eps - 1) / (e^eps (1 - N c) + 1), 1}``, evaluated after dividing
    through by ``e^eps`` so that large epsilon cannot overflow.
    """
    _check(epsilon, c, n)
    tail = math.exp(-epsilon)
    value = -math.expm1(-epsilon) / (credal_slack(c, n) + tail)
    return 1.0 if value >= 1.0 else value


def regime(epsilon: float, c: float, n: int) -> str:
    return SATURATED if xi(epsilon, c, n) == 1.0 else CONTRACTIVE


def regime_threshold(c: float, n: int) -> float:
    """``log(2 / (N c))``; at or above it, some private kernel stops contracting."""
    check_c(c, n)
    return math.log(2.0 / (n * c))


def gamma_max_value(epsilon: float, c: float, n: int) -> float:
    return credal_slack(c, n) * math.exp(epsilon) + 1.0


def gamma_bounds(epsilon: float, c: float, n: int) -> tuple:
    """Extreme output-marginal ratios ``(Gamma_max, Gamma_min)`` across a private kernel.

    Valid for ``0 <= epsilon <= -log c``.
    """
    _check(epsilon, c, n)
    if epsilon > -math.log(c) + 1e-12:
        raise DomainError(f"gamma bounds need epsilon <= -log c = {-math.log(c)!r}, got {epsilon!r}")
    g = gamma_max_value(epsilon, c, n)
    return g, 1.0 / g


def _generator_at(spec: DivergenceSpec, t: float) -> float:
    try:
        value = spec.f(t)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise GeneratorError(f"generator fails at t={t!r}: {exc}") from exc
    if not math.isfinite(value):
        raise GeneratorError(f"generator is not finite at t={t!r}")
    return value


def binette_bound(spec: DivergenceSpec, epsilon: float, c: float, n: int, delta: float) -> float:
    """f-divergence bound across a private kernel for inputs at TV distance ``delta``::

        xi * [f(G_min) / (1 - G_min) + f(G_max) / (G_max - 1)] * delta

    When ``N c = 1`` the credal set is a single point, ``G_max = G_min = 1``,
    and the bound is 0.
    """
    _check(epsilon, c, n)
    _check_delta(delta)
    g_max, g_min = gamma_bounds(epsilon, c, n)
    if g_max == 1.0:
        return 0.0
    bracket = _generator_at(spec, g_min) / (1.0 - g_min) + _generator_at(spec, g_max) / (g_max - 1.0)
    return xi(epsilon, c, n) * bracket * delta


def kl_bound(epsilon: float, c: float, n: int, delta: float) -> float:
    """Relative-entropy bound ``xi * log((1 - N c) e^eps + 1) * delta``."""
    _check(epsilon, c, n)
    _check_delta(delta)
    return xi(epsilon, c, n) * math.log(gamma_max_value(epsilon, c, n)) * delta


def hellinger_bound(epsilon: float, c: float, n: int, delta: float) -> float:
    _check(epsilon, c, n)
    _check_delta(delta)
    root = math.sqrt(gamma_max_value(epsilon, c, n))
    return xi(epsilon, c, n) * (2.0 - 4.0 / (root + 1.0)) * delta


def kairouz_eta_bound(epsilon: float) -> float:
    """External baseline: TV contraction of an epsilon-LDP kernel, ``tanh(epsilon / 2)``."""
    if not epsilon >= 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    return math.tanh(epsilon / 2.0)


def duchi_kl_bound(epsilon: float, tv_delta: float) -> float:
    """External baseline: ``min{4, e^{2 eps}} (e^eps - 1)^2 delta^2`` for epsilon-LDP kernels."""
    if not epsilon >= 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    _check_delta(tv_delta)
    return min(4.0, math.exp(2.0 * epsilon)) * math.expm1(epsilon) ** 2 * tv_delta ** 2


def asoodeh_eta_kl_bound(epsilon: float) -> float:
    """External baseline: KL contraction of an epsilon-LDP kernel, ``tanh(epsilon / 2)^2``."""
    return kairouz_eta_bound(epsilon) ** 2


def _kl_rate(epsilon: float, c: float, n: int, delta: float, private: bool = True) -> float:
    factor = xi(epsilon, c, n) if private else 1.0
    return factor * math.log(gamma_max_value(epsilon, c, n)) * delta


def _check_minimax(epsilon, c, n, delta):
    _check(epsilon, c, n)
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"separation must lie in [0, 1], got {delta!r}")


def minimax_lower_bound(n_samples: int, epsilon: float, c: float, n: int, delta: float,
                        private: bool = True) -> float:
    """Two-point minimax risk floor ``0.5 exp(-n xi log((1 - N c) e^eps + 1) delta)``.

    ``private=False`` drops the ``xi`` factor, giving the reference curve a
    non-contracting mechanism would have.
    """
    if n_samples < 1:
        raise DomainError(f"need at least one sample, got {n_samples}")
    _check_minimax(epsilon, c, n, delta)
    return 0.5 * math.exp(-n_samples * _kl_rate(epsilon, c, n, delta, private))


def sample_complexity(epsilon: float, c: float, n: int, delta: float, target_risk: float,
                      private: bool = True) -> int:
    """Smallest sample size at which the minimax floor drops to ``target_risk``."""
    if not 0.0 < target_risk < 0.5:
        raise DomainError(f"target risk must lie in (0, 0.5), got {target_risk!r}")
    _check_minimax(epsilon, c, n, delta)
    rate = _kl_rate(epsilon, c, n, delta, private)
    if rate <= 0.0:
        raise SaturationError("zero divergence per sample; the floor never drops below 1/2")
    raw = math.log(0.5 / target_risk) / rate
    if not math.isfinite(raw):
        raise SaturationError(f"divergence per sample {rate!r} is too small to reach the target")
    count = max(1, math.ceil(raw))
    # guard the ceiling against rounding; a few steps suffice, and huge counts
    # are beyond float resolution anyway
    for _ in range(GUARD_STEPS):
        if count > 1 and minimax_lower_bound(count - 1, epsilon, c, n, delta, private) <= target_risk:
            count -= 1
    for _ in range(GUARD_STEPS):
        if minimax_lower_bound(count, epsilon, c, n, delta, private) > target_risk:
            count += 1
    return count


def _flags(epsilon, c):
    return ("epsilon_exceeds_neg_log_c",) if epsilon > -math.log(c) else ()


def bound_report(kind: str, epsilon: float, c: float, n: int, delta: float = 1.0,
                 sample_size: int = 1, target_risk: float = 0.25) -> BoundReport:
    """Evaluate one named bound together with the quantities it is built from."""
    _check(epsilon, c, n)
    x = xi(epsilon, c, n)
    components = {
        "xi": x,
        "threshold": regime_threshold(c, n),
        "gamma_max": gamma_max_value(epsilon, c, n),
        "gamma_min": 1.0 / gamma_max_value(epsilon, c, n),
    }
    flags = _flags(epsilon, c)
    kind = kind.lower()
    if kind == "xi":
        value = x
    elif kind == "regime":
        value = components["threshold"]
    elif kind == "gamma":
        value = gamma_bounds(epsilon, c, n)[0]
    elif kind == "kl":
        value = kl_bound(epsilon, c, n, delta)
    elif kind == "hellinger":
        value = hellinger_bound(epsilon, c, n, delta)
    elif kind == "binette-kl":
        value = binette_bound(DivergenceSpec(KL), epsilon, c, n, delta)
    elif kind == "binette-hellinger":
        value = binette_bound(DivergenceSpec(HELLINGER_SQ), epsilon, c, n, delta)
    elif kind == "kairouz":
        value = kairouz_eta_bound(epsilon)
    elif kind == "duchi":
        value = duchi_kl_bound(epsilon, delta)
    elif kind == "asoodeh":
        value = asoodeh_eta_kl_bound(epsilon)
    elif kind == "minimax":
        value = minimax_lower_bound(sample_size, epsilon, c, n, delta)
        components["nonprivate"] = minimax_lower_bound(sample_size, epsilon, c, n, delta, private=False)
    elif kind == "sample-complexity":
        value = sample_complexity(epsilon, c, n, delta, target_risk)
    else:
        raise DomainError(f"unknown bound kind {kind!r}")
    return BoundReport(value=value, regime=SATURATED if x == 1.0 else CONTRACTIVE,
                       components=components, flags=flags)


BOUND_KINDS = ("xi", "regime", "gamma", "kl", "hellinger", "binette-kl", "binette-hellinger",
               "kairouz", "duchi", "asoodeh", "minimax", "sample-complexity")
