"""Command-line entry point: ``run``, ``verify`` and ``counterexample`` subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import barker1d
from .experiments import (
    ConfigError,
    ExperimentConfig,
    load_config,
    run_experiment,
    verify_suite,
)

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifted-mcmc",
        description="Directional MCMC samplers: experiments, exact verification, tail-probability probe",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sampler experiment and write a CSV")
    run_p.add_argument("--config", help="JSON config file (fields mirror ExperimentConfig)")
    run_p.add_argument("--experiment", help="experiment name when no config file is given")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--iterations", type=int, default=None)
    run_p.add_argument("--replicates", type=int, default=None)
    run_p.add_argument("--output", default=None, help="CSV output path")
    run_p.add_argument("--workers", type=int, default=None,
                       help="process-pool size (default: LIFTED_MCMC_THREADS or the cpu count)")

    ver_p = sub.add_parser("verify", help="run the exact certificate suite")
    ver_p.add_argument("--instances", type=int, default=200)
    ver_p.add_argument("--seed", type=int, default=0)
    ver_p.add_argument("--output", default=None, help="JSON report path (default: stdout)")
    ver_p.add_argument("--skip-ising", action="store_true", help="random instances only")
    ver_p.add_argument("--inject-fault", action="store_true",
                       help="corrupt one kernel entry; the suite must fail naming the certificate")

    cx_p = sub.add_parser("counterexample", help="tail-probability ratio scan P_rev/P_MH")
    cx_p.add_argument("--sigma", type=float, default=0.5)
    cx_p.add_argument("--k-max", type=int, default=10)
    cx_p.add_argument("--tol", type=float, default=1e-12)
    return parser


def _cmd_run(args) -> int:
    try:
        if args.config:
            cfg = load_config(
                args.config,
                seed=args.seed,
                iterations=args.iterations,
                replicates=args.replicates,
                output_path=args.output,
                workers=args.workers,
                experiment=args.experiment,
            )
        else:
            if not args.experiment:
                raise ConfigError("invalid configuration:\n  - provide --config or --experiment")
            cfg = ExperimentConfig(experiment=args.experiment)
            overrides = {
                "seed": args.seed,
                "iterations": args.iterations,
                "replicates": args.replicates,
                "output_path": args.output,
                "workers": args.workers,
            }
            cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
        cfg = cfg.validated()
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(exc, file=sys.stderr)
        return 2

    try:
        result = run_experiment(cfg)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 2
    for row in result.aggregates:
        if row["replicate"] != "mean":
            continue
        bound = f"  bound={row['bound']:.4g}" if row.get("bound") is not None else ""
        print(
            f"{row['point']:>12}  {row['sampler']:>7}  acc={row['acc_rate']:.4f}  "
            f"var={row['asym_var']:.4g} +- {row['std_err']:.2g}{bound}"
        )
    if cfg.experiment == "counterexample":
        for row in result.rows:
            if row["sampler"] == "rev":
                print(f"{row['point']:>8}  P_rev={row['asym_var']:.6e}  ratio={row['bound']:.6e}")
    if cfg.output_path:
        print(f"wrote {cfg.output_path}")
    return 0


def _cmd_verify(args) -> int:
    report = verify_suite(
        seed=args.seed,
        instance_count=args.instances,
        include_ising=not args.skip_ising,
        inject_fault=args.inject_fault,
    )
    payload = report.to_json()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    if report.passed:
        print(f"verified {report.instances} instances, no violations", file=sys.stderr)
        return 0
    for violation in report.violations[:20]:
        print(f"FAILED CERTIFICATE: {violation}", file=sys.stderr)
    return 1


def _cmd_counterexample(args) -> int:
    probes = barker1d.counterexample_scan(args.sigma, range(0, args.k_max + 1), epsabs=args.tol)
    print(f"{'k':>4}  {'P_rev(0,B_k)':>16}  {'P_MH(0,B_k)':>16}  {'ratio':>12}")
    for probe in probes:
        print(f"{probe.k:>4g}  {probe.p_rev:>16.6e}  {probe.p_mh:>16.6e}  {probe.ratio:>12.6e}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    return _cmd_counterexample(args)


if __name__ == "__main__":
    sys.exit(main())
