"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 soundness alarm, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bounds, contraction, divergences, leakage, mechanisms
from .core import PrivacyBudget, as_distribution, load_distribution, load_kernel
from .errors import PMLError, SoundnessAlarm, ValidationError
from .experiments import CSV_SCHEMAS, KINDS, ExperimentConfig, format_value, render_csv, run_experiment

EXIT_OK, EXIT_VALIDATION, EXIT_ALARM, EXIT_IO = 0, 2, 3, 4

EXPERIMENT_HELP = "CSV schemas:\n" + "\n".join(
    f"  {kind}: {','.join(cols)}" for kind, cols in CSV_SCHEMAS.items()
) + "\n  (figure1 drops kairouz_tv_bound,duchi_kl_bound when the kernel has no finite LDP level)" \
    "\nm0-search and lemma4-check write JSON reports."


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _finite_or_none(value):
    return None if math.isinf(value) else float(value)


def _emit(args, payload, kernel=None):
    if args.format == "csv" and kernel is not None:
        cols = [f"y{j}" for j in range(kernel.n_outputs)]
        text = render_csv(cols, [dict(zip(cols, row)) for row in kernel.matrix.tolist()])
    elif args.format == "csv":
        flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
        text = render_csv(list(flat), [flat])
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kernel(args):
    if args.ref:
        return mechanisms.reference_kernels()[args.ref]
    if args.kernel:
        return load_kernel(args.kernel)
    raise ValidationError("give a kernel with --kernel FILE or --ref K1|K2")


def _distribution(args):
    if args.dist:
        return load_distribution(args.dist)
    if args.probs:
        return as_distribution([float(v) for v in args.probs.split(",")])
    raise ValidationError("give a distribution with --dist FILE or --probs a,b,...")


def _search(args):
    return contraction.SearchConfig(restarts=args.restarts, refine_rounds=args.refine, seed=args.seed)


def cmd_capacity(args):
    K = _kernel(args)
    per = leakage.column_capacities(K.matrix, args.c)
    _emit(args, {"c": args.c, "capacity": leakage.leakage_capacity(K, args.c),
                 "per_outcome": [max(0.0, float(v)) for v in per]})


def cmd_ldp(args):
    value = leakage.ldp(_kernel(args))
    _emit(args, {"ldp": _finite_or_none(value), "infinite": math.isinf(value)})


def cmd_pml(args):
    K, P = _kernel(args), _distribution(args)
    if args.y is None:
        report = leakage.pml_report(K, P)
        _emit(args, {"per_outcome": list(report.per_outcome), "max": report.capacity})
    else:
        _emit(args, {"y": args.y, "pml": leakage.pml_pointwise(K, P, args.y),
                     "disclosure_floor": leakage.subset_disclosure_floor(K, P, args.y)})


def cmd_dobrushin(args):
    K = _kernel(args)
    decomposable, pair = contraction.is_decomposable(K)
    _emit(args, {"dobrushin": contraction.dobrushin(K), "decomposable": decomposable,
                 "witness": list(pair) if pair else None})


def cmd_eta(args):
    K = _kernel(args)
    if args.div == "chi2" and args.c is None:
        est = contraction.eta_chi2(K, _search(args))
    else:
        est = contraction.empirical_eta_f(K, divergences.spec_from_name(args.div), args.c, _search(args))
    witness = [w.probs.tolist() for w in est.witness_pair] if est.witness_pair else None
    _emit(args, {"divergence": args.div, "c": args.c, "lower": est.lower, "upper": est.upper,
                 "iterations": est.iterations, "witness": witness})


def cmd_construct(args):
    K = mechanisms.construct_optimal(args.n, args.eps, args.c, args.q)
    _emit(args, K.to_json(), kernel=K)


def cmd_sample(args):
    K = mechanisms.sample_kernel(args.n, args.m, PrivacyBudget(args.eps, args.c), rng_seed=args.seed)
    _emit(args, K.to_json(), kernel=K)


def cmd_bound(args):
    report = bounds.bound_report(args.kind, args.eps, args.c, args.n, delta=args.delta,
                                 sample_size=args.sample_size, target_risk=args.target)
    _emit(args, {"kind": args.kind, **report.to_json()})


def cmd_experiment(args):
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig(kind=args.kind)
    if args.kind:
        config.kind = args.kind
    if args.seed_given:
        config.seed = args.seed
    if args.out:
        config.output_path = args.out
    if args.samples is not None:
        config.samples = args.samples
    if args.tolerance is not None:
        config.parameters = {**config.parameters, "tolerance": args.tolerance}
    config.__post_init__()
    summary = run_experiment(config)
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")


class _SeedAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.seed_given = True


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, action=_SeedAction, help="RNG seed (default 0)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tolerance", type=float, default=None,
                        help="soundness-alarm tolerance for experiments (default 1e-9)")
    common.set_defaults(seed_given=False)

    kernel_in = argparse.ArgumentParser(add_help=False)
    src = kernel_in.add_mutually_exclusive_group()
    src.add_argument("--kernel", help='kernel JSON file {"rows": [[...], ...]}')
    src.add_argument("--ref", choices=("K1", "K2"), help="built-in reference kernel")

    parser = argparse.ArgumentParser(prog="pml-contraction",
                                     description="Leakage and contraction analysis of discrete privacy mechanisms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common, kernel_in], help="(eps, c)-PML leakage capacity")
    p.add_argument("--c", type=float, required=True)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("ldp", parents=[common, kernel_in], help="local differential privacy level")
    p.set_defaults(func=cmd_ldp)

    p = sub.add_parser("pml", parents=[common, kernel_in], help="pointwise maximal leakage")
    p.add_argument("--dist", help='distribution JSON file {"probs": [...]}')
    p.add_argument("--probs", help="comma-separated masses")
    p.add_argument("--y", type=int, default=None, help="single outcome (default: all)")
    p.set_defaults(func=cmd_pml)

    p = sub.add_parser("dobrushin", parents=[common, kernel_in], help="Dobrushin coefficient")
    p.set_defaults(func=cmd_dobrushin)

    p = sub.add_parser("eta", parents=[common, kernel_in], help="search-based contraction estimate")
    p.add_argument("--div", choices=("tv", "kl", "h2", "chi2"), default="tv")
    p.add_argument("--c", type=float, default=None, help="restrict inputs to min mass >= c")
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--refine", type=int, default=50)
    p.set_defaults(func=cmd_eta)

    p = sub.add_parser("construct", parents=[common], help="optimal binary-output mechanism")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--q", type=int, default=None)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("sample", parents=[common], help="random kernel meeting an (eps, c) budget")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("bound", parents=[common], help="closed-form bounds")
    p.add_argument("--kind", choices=bounds.BOUND_KINDS, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="input alphabet size N")
    p.add_argument("--delta", type=float, default=1.0, help="input TV distance / separation")
    p.add_argument("--sample-size", type=int, default=1, help="number of samples n (minimax)")
    p.add_argument("--target", type=float, default=0.25, help="target risk (sample-complexity)")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment driver",
                       epilog=EXPERIMENT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment" and not (args.kind or args.config):
        parser.error("experiment needs --kind or --config")
    try:
        args.func(args)
    except SoundnessAlarm as exc:
        witness = json.dumps(exc.witness, sort_keys=True, default=_json_default)
        print(f"SOUNDNESS ALARM: {exc}\nwitness: {witness}", file=sys.stderr)
        return EXIT_ALARM
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PMLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
