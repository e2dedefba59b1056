"""Reproducible experiment drivers.

Each driver takes an :class:`ExperimentConfig`, writes a CSV or JSON file and
raises :class:`~pml_contraction.errors.SoundnessAlarm` (before writing) if an
empirical quantity ever exceeds the bound that should cap it.  Output bytes
depend only on the config, so a fixed seed gives identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds
from .contraction import binarize, dobrushin
from .core import StochasticKernel, check_c, credal_slack, load_kernel
from .divergences import hellinger_sq_rows, kl_rows, tv_rows
from .errors import ConfigError, InfeasibleQ, SaturationError, SoundnessAlarm
from .leakage import column_capacities, leakage_capacity, ldp
from .mechanisms import construct_optimal, feasibility_rows, reference_kernels

KINDS = ("figure1", "m0-search", "lemma4-check", "minimax-table", "theorem3-grid")
DEFAULT_TOLERANCE = 1e-9
SAMPLING_NOTE = "P = c + (1 - N c) V with V ~ Dirichlet(1), independently for P and Q"

FIGURE1_COLUMNS = ("sample", "tv_in", "tv_out", "kl_out", "hellinger_out",
                   "xi_tv_bound", "kl_bound", "hellinger_bound")
FIGURE1_LDP_COLUMNS = ("kairouz_tv_bound", "duchi_kl_bound")
THEOREM3_COLUMNS = ("n", "c", "epsilon", "q", "status", "dobrushin", "xi", "capacity")
MINIMAX_COLUMNS = ("epsilon", "c", "delta", "xi", "regime", "lower_bound", "sample_complexity",
                   "nonprivate_lower_bound", "nonprivate_sample_complexity", "status")

CSV_SCHEMAS = {
    "figure1": FIGURE1_COLUMNS + FIGURE1_LDP_COLUMNS,
    "theorem3-grid": THEOREM3_COLUMNS,
    "minimax-table": MINIMAX_COLUMNS,
}

# the reference kernels come with the c they were designed for
REFERENCE_C = {"K1": 0.05, "K2": 0.1}


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    samples: int = 1000
    output_path: Optional[str] = None
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.samples, int) or self.samples < 0:
            raise ConfigError(f"samples must be a nonnegative integer, got {self.samples!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"kind", "seed", "samples", "output_path", "parameters"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def param(self, name, default=None):
        return self.parameters.get(name, default)

    @property
    def tolerance(self) -> float:
        return float(self.param("tolerance", DEFAULT_TOLERANCE))


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(float(value), ".17g")
    return str(value)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(col)) for col in columns])
    return buf.getvalue()


def _write(path, text: str) -> None:
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _resolve_kernel(spec) -> tuple:
    refs = reference_kernels()
    if spec in refs:
        return spec, refs[spec]
    try:
        return str(spec), load_kernel(spec)
    except FileNotFoundError as exc:
        raise ConfigError(f"kernel must be K1, K2 or a JSON file; {spec!r} not found") from exc


def _alarm(message, **witness):
    raise SoundnessAlarm(message, witness)


def run_figure1(config: ExperimentConfig) -> dict:
    """Empirical divergences across a kernel versus their bounds, one CSV row per (P, Q) pair."""
    name, K = _resolve_kernel(config.param("kernel", "K1"))
    n = K.n_inputs
    c = config.param("c", REFERENCE_C.get(name))
    if c is None:
        raise ConfigError("figure1 needs parameters.c for a user kernel")
    check_c(c, n)
    if credal_slack(c, n) == 0.0:
        raise ConfigError("c = 1/N leaves a single input distribution; nothing to sample")
    epsilon = float(config.param("epsilon", leakage_capacity(K, c)))
    capacity = leakage_capacity(K, c)
    if capacity > epsilon + 1e-12:
        raise ConfigError(f"kernel leaks {capacity!r} > epsilon={epsilon!r} at c={c!r}")
    ldp_level = ldp(K)
    has_ldp = not math.isinf(ldp_level)

    rng = np.random.default_rng(config.seed)
    V = rng.dirichlet(np.ones(n), size=config.samples)
    W = rng.dirichlet(np.ones(n), size=config.samples)
    P = c + credal_slack(c, n) * V
    Q = c + credal_slack(c, n) * W
    KP, KQ = P @ K.matrix, Q @ K.matrix
    delta = tv_rows(P, Q)
    columns = {
        "tv_in": delta,
        "tv_out": tv_rows(KP, KQ),
        "kl_out": kl_rows(KP, KQ),
        "hellinger_out": hellinger_sq_rows(KP, KQ),
        "xi_tv_bound": bounds.xi(epsilon, c, n) * delta,
        "kl_bound": bounds.kl_bound(epsilon, c, n, 1.0) * delta,
        "hellinger_bound": bounds.hellinger_bound(epsilon, c, n, 1.0) * delta,
    }
    checks = [("tv_out", "xi_tv_bound"), ("kl_out", "kl_bound"), ("hellinger_out", "hellinger_bound")]
    header = FIGURE1_COLUMNS
    if has_ldp:
        columns["kairouz_tv_bound"] = bounds.kairouz_eta_bound(ldp_level) * delta
        columns["duchi_kl_bound"] = bounds.duchi_kl_bound(ldp_level, 1.0) * delta ** 2
        checks += [("tv_out", "kairouz_tv_bound"), ("kl_out", "duchi_kl_bound")]
        header = header + FIGURE1_LDP_COLUMNS

    tol = config.tolerance
    for value_col, bound_col in checks:
        excess = columns[value_col] - columns[bound_col]
        bad = np.flatnonzero(excess > tol)
        if bad.size:
            i = int(bad[0])
            _alarm(f"{value_col} exceeds {bound_col} in sample {i}", sample=i, P=P[i].tolist(),
                   Q=Q[i].tolist(), value=float(columns[value_col][i]),
                   bound=float(columns[bound_col][i]))

    rows = [{"sample": i, **{k: float(v[i]) for k, v in columns.items()}} for i in range(config.samples)]
    _write(config.output_path, render_csv(header, rows))
    meta = {
        "kind": "figure1",
        "kernel": name,
        "n": n,
        "c": c,
        "epsilon": epsilon,
        "ldp": ldp_level if has_ldp else None,
        "seed": config.seed,
        "samples": config.samples,
        "sampling": SAMPLING_NOTE,
        "columns": list(header),
        "baselines": ["kairouz_tv_bound", "duchi_kl_bound"] if has_ldp else [],
    }
    if config.output_path is not None:
        _write(str(config.output_path) + ".meta.json", _dump_json(meta))
    return {**meta, "max_kl_slack": float(np.min(columns["kl_bound"] - columns["kl_out"], initial=np.inf))}


def run_m0_search(config: ExperimentConfig) -> dict:
    """Random binary kernels with a zero in both columns, checked against the budget."""
    n = int(config.param("n", 5))
    c = float(config.param("c", 0.1))
    epsilon = float(config.param("epsilon", 1.0))
    check_c(c, n)
    threshold = bounds.regime_threshold(c, n)
    if epsilon >= threshold:
        raise ConfigError(f"epsilon={epsilon!r} is not below log(2/(N c)) = {threshold!r}; the search is vacuous")
    rng = np.random.default_rng(config.seed)
    S = config.samples
    p = rng.random((S, n))
    zero_at = rng.integers(0, n, size=S)
    one_at = (zero_at + rng.integers(1, n, size=S)) % n
    rows = np.arange(S)
    p[rows, zero_at] = 0.0
    p[rows, one_at] = 1.0
    f1, f2 = feasibility_rows(p, epsilon, c)
    feasible = (f1 <= 1e-12) & (f2 <= 1e-12)
    kernels = np.stack([p, 1.0 - p], axis=-1)
    capacities = column_capacities(kernels, c).max(axis=-1) if S else np.array([])
    min_capacity = float(capacities.min()) if S else None
    report = {
        "kind": "m0-search",
        "n": n,
        "c": c,
        "epsilon": epsilon,
        "threshold": threshold,
        "seed": config.seed,
        "samples": S,
        "found_feasible": int(feasible.sum()),
        "min_capacity": min_capacity,
        "min_capacity_ok": bool(min_capacity is None or min_capacity >= threshold - config.tolerance),
    }
    if report["found_feasible"]:
        i = int(np.flatnonzero(feasible)[0])
        _alarm("found a private kernel with zeros in both columns", p=p[i].tolist(), **report)
    if not report["min_capacity_ok"]:
        i = int(np.argmin(capacities))
        _alarm("capacity fell below log(2/(N c))", p=p[i].tolist(), **report)
    _write(config.output_path, _dump_json(report))
    return report


def _random_triple(rng, n_max, m_max, constant_fraction):
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(2, m_max + 1))
    if rng.random() < constant_fraction:
        K = np.tile(rng.dirichlet(np.ones(m)), (n, 1))
    else:
        K = rng.dirichlet(np.ones(m), size=n)
    return StochasticKernel(K), rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))


def run_lemma4_check(config: ExperimentConfig) -> dict:
    """Binarize random kernels and confirm TV is kept and leakage does not grow."""
    n_max = int(config.param("n_max", 5))
    m_max = int(config.param("m_max", 6))
    if not 2 <= n_max <= 5 or not 2 <= m_max <= 6:
        raise ConfigError("lemma4-check needs 2 <= n_max <= 5 and 2 <= m_max <= 6")
    c_values = [float(c) for c in config.param("c_values", [0.05, 0.1])]
    for c in c_values:
        check_c(c, n_max)
    constant_fraction = float(config.param("constant_fraction", 0.1))
    max_tv = 0.0
    max_increase = {format_value(c): 0.0 for c in c_values}
    degenerate = 0
    worst = None
    for i in range(config.samples):
        rng = np.random.default_rng([config.seed, i])
        K, P, Q = _random_triple(rng, n_max, m_max, constant_fraction)
        B = binarize(K, P, Q)
        before = tv_rows(P @ K.matrix, Q @ K.matrix)
        after = tv_rows(P @ B.matrix, Q @ B.matrix)
        if not np.any(P @ K.matrix > Q @ K.matrix):
            degenerate += 1
        gap = abs(float(after) - float(before))
        if gap > max_tv:
            max_tv, worst = gap, {"sample": i, "kernel": K.matrix.tolist(), "P": P.tolist(), "Q": Q.tolist()}
        for c in c_values:
            inc = leakage_capacity(B, c) - leakage_capacity(K, c)
            key = format_value(c)
            max_increase[key] = max(max_increase[key], inc)
    report = {
        "kind": "lemma4-check",
        "seed": config.seed,
        "samples": config.samples,
        "n_max": n_max,
        "m_max": m_max,
        "degenerate_pairs": degenerate,
        "max_tv_violation": max_tv,
        "max_capacity_increase": max_increase,
    }
    if max_tv > config.tolerance:
        _alarm("binarization changed the TV distance", **worst)
    if any(v > config.tolerance for v in max_increase.values()):
        _alarm("binarization increased leakage capacity", **report)
    _write(config.output_path, _dump_json(report))
    return report


def _theorem3_grid(config):
    n_values = [int(n) for n in config.param("n_values", [2, 3, 4, 5, 6])]
    c_values = [float(c) for c in config.param("c_values", [0.01, 0.05])]
    c_over_n = [float(a) for a in config.param("c_over_n", [0.5])]
    eps_values = [float(e) for e in config.param("eps_values", [0.0, 0.1, 0.5])]
    fractions = [float(f) for f in config.param("eps_threshold_fractions", [0.9])]
    for n in n_values:
        cs = [c for c in c_values if c <= 1.0 / n] + [a / n for a in c_over_n]
        for c in cs:
            threshold = bounds.regime_threshold(c, n)
            for eps in eps_values + [f * threshold for f in fractions]:
                if eps < threshold:
                    yield n, c, eps


def run_theorem3_grid(config: ExperimentConfig) -> dict:
    """Build the optimal mechanism over a parameter grid and compare with the closed form."""
    rows = []
    tol = config.tolerance
    for n, c, eps in _theorem3_grid(config):
        x = bounds.xi(eps, c, n)
        for q in range(1, n):
            row = {"n": n, "c": c, "epsilon": eps, "q": q, "xi": x}
            try:
                K = construct_optimal(n, eps, c, q)
            except InfeasibleQ:
                rows.append({**row, "status": "infeasible_q"})
                continue
            row.update(status="ok", dobrushin=dobrushin(K), capacity=leakage_capacity(K, c))
            if abs(row["dobrushin"] - x) > 1e-12 or abs(row["capacity"] - eps) > max(tol, 1e-9):
                _alarm("optimal mechanism misses the closed form", **row)
            rows.append(row)
    _write(config.output_path, render_csv(THEOREM3_COLUMNS, rows))
    ok = sum(r["status"] == "ok" for r in rows)
    return {"kind": "theorem3-grid", "rows": len(rows), "ok": ok, "infeasible_q": len(rows) - ok}


def run_minimax_table(config: ExperimentConfig) -> dict:
    """Two-point minimax floors and sample sizes, private versus non-contracting."""
    n = int(config.param("n", 4))
    sample_size = int(config.param("sample_size", 10))
    target = float(config.param("target_risk", 0.25))
    eps_values = [float(e) for e in config.param("eps_values", [0.0, 0.5, math.log(2), 1.0, 2.0])]
    c_values = [float(c) for c in config.param("c_values", [0.05, 0.1, 0.2])]
    deltas = [float(d) for d in config.param("deltas", [0.05, 0.1, 0.2])]
    for d in deltas:
        if not 0.0 < d < 0.25:
            raise ConfigError(f"separations must lie in (0, 1/4), got {d!r}")
    if not 0.0 < target < 0.5:
        raise ConfigError(f"target_risk must lie in (0, 0.5), got {target!r}")
    rows = []
    for eps in eps_values:
        for c in c_values:
            check_c(c, n)
            for d in deltas:
                row = {
                    "epsilon": eps, "c": c, "delta": d,
                    "xi": bounds.xi(eps, c, n),
                    "regime": bounds.regime(eps, c, n),
                    "lower_bound": bounds.minimax_lower_bound(sample_size, eps, c, n, d),
                    "nonprivate_lower_bound": bounds.minimax_lower_bound(sample_size, eps, c, n, d, private=False),
                    "status": "ok",
                }
                try:
                    row["sample_complexity"] = bounds.sample_complexity(eps, c, n, d, target)
                    row["nonprivate_sample_complexity"] = bounds.sample_complexity(eps, c, n, d, target, private=False)
                except SaturationError:
                    row["status"] = "no_information"
                rows.append(row)
    _write(config.output_path, render_csv(MINIMAX_COLUMNS, rows))
    return {"kind": "minimax-table", "rows": len(rows), "n": n, "sample_size": sample_size,
            "target_risk": target}


RUNNERS = {
    "figure1": run_figure1,
    "m0-search": run_m0_search,
    "lemma4-check": run_lemma4_check,
    "minimax-table": run_minimax_table,
    "theorem3-grid": run_theorem3_grid,
}


def run_experiment(config: ExperimentConfig) -> dict:
    return RUNNERS[config.kind](config)
