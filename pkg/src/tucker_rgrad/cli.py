"""Command line interface: ``recover``, ``phase`` and ``trial``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .harness import (
    SUCCESS_THRESHOLD,
    PhaseGrid,
    TrialSpec,
    add_noise,
    derive_seed,
    dof,
    phase_boundary,
    random_low_rank_tensor,
    run_phase_grid,
    run_trial,
)
from .measurement import make_operator
from .solver import SolverConfig, recover


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=("rgrad", "niht"), default="rgrad")
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-6, help="relative residual tolerance")
    p.add_argument("--change-tol", type=float, default=1e-12, help="relative iterate-change tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tucker-rgrad", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="recover one synthetic tensor and print a JSON report")
    p.add_argument("--dims", type=_int_list, required=True)
    p.add_argument("--rank", type=_int_list, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--op", choices=("gaussian", "fourier"), default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--history", action="store_true", help="include per-iteration histories")
    _add_solver_args(p)

    p = sub.add_parser("phase", help="run a phase-transition grid and append CSV rows")
    p.add_argument("--rank", type=_int_list, required=True)
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--m-list", type=_int_list, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--op", choices=("gaussian", "fourier"), default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--success-threshold", type=float, default=SUCCESS_THRESHOLD)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    _add_solver_args(p)
    p.set_defaults(max_iters=500)

    p = sub.add_parser("trial", help="run one trial described by a JSON file")
    p.add_argument("--spec", required=True)
    return parser


def _solver_config(args, rank) -> SolverConfig:
    return SolverConfig(
        rank=rank,
        max_iters=args.max_iters,
        rel_residual_tol=args.tol,
        rel_change_tol=args.change_tol,
        algorithm=args.algo,
    )


def _cmd_recover(args) -> dict:
    cfg = _solver_config(args, args.rank)
    truth = random_low_rank_tensor(args.dims, args.rank, derive_seed(args.seed, "tensor")).full()
    op = make_operator(args.op, args.dims, args.m, derive_seed(args.seed, "operator"))
    y = add_noise(op.apply(truth), args.noise, derive_seed(args.seed, "noise"))
    report = recover(op, y, cfg)
    out = report.summary()
    if not args.history:
        out.pop("residual_history")
        out.pop("step_history")
    out["relative_error"] = float(np.linalg.norm(report.final.full() - truth) / np.linalg.norm(truth))
    out["dof"] = dof(args.dims, args.rank)
    out["operator"] = op.to_dict()
    return out


def _cmd_phase(args) -> dict:
    grid = PhaseGrid(
        n_values=args.n_list,
        m_values=args.m_list,
        rank=args.rank,
        trials_per_cell=args.trials,
        base_seed=args.seed,
        operator_kind=args.op,
        noise_level=args.noise,
        algorithm=args.algo,
        max_iters=args.max_iters,
        rel_residual_tol=args.tol,
        rel_change_tol=args.change_tol,
        success_threshold=args.success_threshold,
    )
    cells = run_phase_grid(grid, out=args.out, workers=args.workers)
    return {
        "cells": len(cells),
        "out": args.out,
        "boundary_95": {str(n): m for n, m in phase_boundary(cells).items()},
    }


def _cmd_trial(args) -> dict:
    with open(args.spec) as fh:
        spec = TrialSpec.from_dict(json.load(fh))
    result = run_trial(spec)
    return {"spec": spec.to_dict(), **vars(result)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    handlers = {"recover": _cmd_recover, "phase": _cmd_phase, "trial": _cmd_trial}
    try:
        out = handlers[args.command](args)
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
