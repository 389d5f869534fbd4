"""Command-line harness: analytic tables and reproducible simulations.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors.
"""

import argparse
import json
import sys

import numpy as np

from .channels import (breakdown_csv, breakdown_table, format_breakdown,
                       format_tradeoff, tradeoff_csv, tradeoff_table)
from .exceptions import DomainError
from .experiments import (ExperimentConfig, emit_csv, rows_to_csv, run_experiment,
                          summarize, summary_csv, with_overrides)
from .noise import NoiseModel
from .quantizer import channel_constants, distortion, lloyd_max_design

__all__ = ["main", "build_parser"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits on its own; raise instead so main() owns the exit codes
    def error(self, message):
        raise _UsageError("%s: error: %s" % (self.prog, message))


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers, got %r" % text)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers, got %r" % text)


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")


def build_parser():
    parser = _Parser(prog="quantcs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("lloyd-max", help="design a Lloyd-Max quantizer")
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--std", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--sigma", type=float, default=0.0,
                   help="additive noise level for the reported lambda, Psi, Omega")
    _add_seed(p)

    p = sub.add_parser("tradeoff", help="error-constant ratios of consecutive bit depths")
    p.add_argument("--bits", type=_int_list, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sigma", type=float, help="additive noise level (default 0)")
    g.add_argument("--flip-random", type=float)
    g.add_argument("--flip-adversarial", type=float)
    p.add_argument("--csv", action="store_true")
    _add_seed(p)

    p = sub.add_parser("breakdown", help="breakdown points of the flip channels")
    p.add_argument("--bits", type=_int_list, required=True)
    p.add_argument("--csv", action="store_true")
    _add_seed(p)

    for name, help_ in (("simulate", "run a recovery experiment"),
                        ("scale-sim", "run the joint scale and noise-level experiment")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="flat JSON config; flags below override it")
        p.add_argument("--class", dest="signal_class",
                       choices=["sparse", "fused", "group", "lowrank", "l1ball"])
        p.add_argument("--n", type=int)
        p.add_argument("--L", type=int, help="number of groups (group class)")
        p.add_argument("--n1", type=int)
        p.add_argument("--n2", type=int)
        p.add_argument("--radius", type=float)
        p.add_argument("--s", type=_int_list)
        p.add_argument("--f", type=_float_list)
        p.add_argument("--bits", type=_int_list)
        p.add_argument("--noise", choices=["additive", "random_flip", "adversarial_flip"])
        p.add_argument("--params", type=_float_list, help="sigma or flip-probability grid")
        p.add_argument("--replicates", type=int)
        p.add_argument("--m-mode", choices=["equal_m", "equal_bits"])
        p.add_argument("--design-std", choices=["unit", "matched"])
        p.add_argument("--workers", type=int)
        p.add_argument("--output", help="CSV path (default: stdout)")
        p.add_argument("--summary", help="also write per-cell mean/sd CSV here")
        _add_seed(p)
    return parser


def _cmd_lloyd_max(args):
    q = lloyd_max_design(args.bits, args.std, tol=args.tol, max_iter=args.max_iter)
    model = NoiseModel.additive(args.sigma)
    c = channel_constants(q, model)
    print("bits        %d" % q.bits)
    print("thresholds  %s" % " ".join("%.6f" % t for t in q.thresholds))
    print("levels      %s" % " ".join("%.6f" % v for v in q.levels))
    print("distortion  %.6f" % distortion(q, args.std))
    print("lambda      %.6f" % c.lam)
    print("Psi         %.6f" % c.psi)
    print("Omega       %.6f" % c.omega)
    return 0


def _cmd_tradeoff(args):
    if args.flip_random is not None:
        model = NoiseModel.random_flip(args.flip_random)
    elif args.flip_adversarial is not None:
        model = NoiseModel.adversarial_flip(args.flip_adversarial)
    else:
        model = NoiseModel.additive(args.sigma or 0.0)
    rows = tradeoff_table(args.bits, model)
    print(tradeoff_csv(rows) if args.csv else format_tradeoff(rows), end="\n" if not args.csv else "")
    return 0


def _cmd_breakdown(args):
    rows = breakdown_table(args.bits)
    print(breakdown_csv(rows) if args.csv else format_breakdown(rows), end="\n" if not args.csv else "")
    return 0


def _config_from_args(args, scale):
    base = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except OSError as exc:
            raise _UsageError("cannot read config %s: %s" % (args.config, exc.strerror))
        except json.JSONDecodeError as exc:
            raise _UsageError("config %s is not valid JSON: %s" % (args.config, exc))
        if not isinstance(base, dict):
            raise _UsageError("config %s must hold a JSON object" % args.config)
    if scale:
        base.setdefault("bits", [2])
        base.setdefault("noise_params", [0.0, 1.0, 2.0])
        base["estimate_scale"] = True
    config = ExperimentConfig.from_dict(base)

    signal = dict(config.signal)
    for key, attr in (("class", "signal_class"), ("n", "n"), ("L", "L"),
                      ("n1", "n1"), ("n2", "n2"), ("radius", "radius")):
        v = getattr(args, attr)
        if v is not None:
            signal[key] = v
    return with_overrides(
        config, signal=signal, s=args.s, f=args.f, bits=args.bits, noise=args.noise,
        noise_params=args.params, replicates=args.replicates, seed=args.seed,
        m_mode=args.m_mode, design_std=args.design_std, workers=args.workers,
        output=args.output)


def _cmd_simulate(args, scale=False):
    config = _config_from_args(args, scale)
    rows = run_experiment(config)
    if config.output:
        emit_csv(rows, config.output)
    else:
        sys.stdout.write(rows_to_csv(rows))
    if args.summary:
        with open(args.summary, "w", newline="") as fh:
            fh.write(summary_csv(summarize(rows)))
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "lloyd-max":
            return _cmd_lloyd_max(args)
        if args.command == "tradeoff":
            return _cmd_tradeoff(args)
        if args.command == "breakdown":
            return _cmd_breakdown(args)
        return _cmd_simulate(args, scale=args.command == "scale-sim")
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(str(exc), file=sys.stderr)
        return 2
    except (DomainError, TypeError) as exc:
        print("quantcs: error: %s" % exc, file=sys.stderr)
        return 2
    except (OSError, ArithmeticError, RuntimeError, np.linalg.LinAlgError, ValueError) as exc:
        print("quantcs: error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
