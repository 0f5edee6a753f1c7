"""Command line front end.

Subcommands::

    conditioning  cond2 table of monomial vs. V+A bases
    geometry      per-node chart conditioning for the transcendental curve
    sweep         error sweep of one scenario over all methods
    fit           fit a model from .npy/.txt sample files and save it
    eval          load a model and evaluate it at given or equispaced points

Exit status: 0 on success, 2 on bad arguments or configuration, 3 on a
numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..errors import NumericalError
from ..interpolant import evaluate_many, evaluate_many_with_velocity, fit_hermite, fit_lagrange
from .modelio import load_model, save_model
from .runs import METHODS, SCENARIOS, ExperimentConfig, run_conditioning_table, run_error_sweep, run_geometry_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _ConfigError(message)


def _methods(text):
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in items if s not in METHODS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
    return items


def _add_common(sp):
    sp.add_argument("--scenario", choices=SCENARIOS, default="example1")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--small", action="store_true", help="use n = 200")
    sp.add_argument("--ref-index", type=int, default=None)
    sp.add_argument("--out", default=None, help="CSV path (stdout if omitted)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="grassinterp", description="Grassmann interpolation experiments")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("conditioning", help="monomial vs. Arnoldi conditioning")
    sp.add_argument("--sizes", default="12,20,30,40")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("geometry", help="per-node chart conditioning")
    _add_common(sp)

    sp = sub.add_parser("sweep", help="error sweep over probe points")
    _add_common(sp)
    sp.add_argument("--probes", type=int, default=200)
    sp.add_argument("--methods", type=_methods, default=None)
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--m", type=int, default=None, help="node count")
    sp.add_argument("--noise", type=float, default=None)
    sp.add_argument("--approach", choices=("augmented", "surrogate"), default="augmented")
    sp.add_argument("--mode", choices=("hermite", "lagrange"), default="hermite")

    sp = sub.add_parser("fit", help="fit and save a model")
    sp.add_argument("--nodes", required=True, help=".npy or whitespace-separated text")
    sp.add_argument("--samples", required=True, help=".npy array of shape (m, n, p)")
    sp.add_argument("--lifts", default=None, help=".npy array of shape (m, n, p); enables Hermite mode")
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--approach", choices=("augmented", "surrogate"), default="augmented")
    sp.add_argument("--ref-index", type=int, default=None)
    sp.add_argument("--out", required=True, help="model file")

    sp = sub.add_parser("eval", help="evaluate a saved model")
    sp.add_argument("--model", required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--points", help=".npy or text file of parameters")
    g.add_argument("--probes", type=int, help="equispaced points over the node range")
    sp.add_argument("--out", required=True, help=".npy output, shape (M, n, p)")
    sp.add_argument("--velocity-out", default=None, help=".npy velocity output (Hermite models)")
    return ap


def _load_vector(path):
    path = Path(path)
    a = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, ndmin=1)
    return np.asarray(a, dtype=np.float64).ravel()


def _load_stack(path, name):
    a = np.asarray(np.load(path), dtype=np.float64)
    if a.ndim != 3:
        raise _ConfigError(f"{name} must have shape (m, n, p), got {a.shape}")
    return list(a)


def _print_or_none(table, out):
    if out is None:
        sys.stdout.write(table.to_string())


def _run(args) -> None:
    if args.command == "conditioning":
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        except ValueError as exc:
            raise _ConfigError(str(exc)) from None
        if not sizes or min(sizes) < 2:
            raise _ConfigError("sizes must be integers >= 2")
        cfg = ExperimentConfig(out=args.out)
        _print_or_none(run_conditioning_table(cfg, sizes), args.out)
    elif args.command == "geometry":
        cfg = ExperimentConfig(scenario=args.scenario, seed=args.seed, small=args.small, ref_index=args.ref_index, out=args.out)
        _print_or_none(run_geometry_table(cfg), args.out)
    elif args.command == "sweep":
        kw = dict(
            scenario=args.scenario, seed=args.seed, small=args.small, ref_index=args.ref_index, out=args.out,
            probes=args.probes, degree=args.degree, m=args.m, noise=args.noise, approach=args.approach, mode=args.mode,
        )
        if args.methods is not None:
            kw["methods"] = args.methods
        _print_or_none(run_error_sweep(ExperimentConfig(**kw)), args.out)
    elif args.command == "fit":
        nodes = _load_vector(args.nodes)
        samples = _load_stack(args.samples, "samples")
        if args.lifts is None:
            interp = fit_lagrange(nodes, samples, args.degree, args.ref_index)
        else:
            lifts = _load_stack(args.lifts, "lifts")
            interp = fit_hermite(nodes, samples, lifts, args.degree, args.approach, args.ref_index)
        save_model(interp, args.out)
    elif args.command == "eval":
        interp = load_model(args.model)
        if args.points is not None:
            s = _load_vector(args.points)
        else:
            if args.probes <= 0:
                raise _ConfigError("--probes must be positive")
            s = np.linspace(interp.nodes.min(), interp.nodes.max(), args.probes)
        if args.velocity_out is not None:
            pairs = evaluate_many_with_velocity(interp, s)
            np.save(args.out, np.stack([P.U for P, _ in pairs]))
            np.save(args.velocity_out, np.stack([D.Udot for _, D in pairs]))
        else:
            np.save(args.out, np.stack([P.U for P in evaluate_many(interp, s)]))


def cli_main(argv=None) -> int:
    """Run the CLI and return the exit status."""
    try:
        args = build_parser().parse_args(argv)
        _run(args)
    except _ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError, KeyError) as exc:
        # input-shaped numerical errors (degree too high, colliding nodes) are configuration problems
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main())
