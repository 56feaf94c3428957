"""Configuration-driven experiment runner and the exact verification suite.

Experiments produce one CSV with the stable header

    experiment,point,sampler,replicate,acc_rate,asym_var,std_err,bound

one row per (parameter point, sampler, replicate) plus ``mean`` and ``median``
aggregate rows per (point, sampler); the bound column carries the
variance-chain upper bound 2 * mean(var_mh) + 1 on aggregate rows (the
standardized functional has unit variance), and is empty elsewhere. Identical
config + seed give identical CSV bytes regardless of the worker count.

Seeding: every stream is a numpy SeedSequence spawned from the master seed
with a structured key (stream_kind, point_index, sampler_index, replicate):
kind 0 are chain streams, kind 1 the per-point external-field noise, kind 2
the per-point standardization pilot. Replicates are therefore independent and
individually reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import barker1d, exact, ising
from .balancing import METROPOLIS
from .kernels import LiftedState, lifted_step, mh_step, rev_step
from .variance import ChainTrace, acceptance_rate, batch_means_variance

__all__ = [
    "EXPERIMENTS",
    "SAMPLERS",
    "ExperimentConfig",
    "ConfigError",
    "load_config",
    "resolve_workers",
    "run_chain",
    "run_experiment",
    "VerifyReport",
    "verify_suite",
    "CSV_HEADER",
]

EXPERIMENTS = (
    "verify",
    "ising_eta_sweep",
    "ising_mu_sweep",
    "barker_table",
    "guided_walk",
    "counterexample",
)
SAMPLERS = ("mh", "rev", "lifted")

CSV_HEADER = "experiment,point,sampler,replicate,acc_rate,asym_var,std_err,bound"

PILOT_ITERATIONS = 100_000
PILOT_BURN_IN = 10_000

WORKERS_ENV_VAR = "LIFTED_MCMC_THREADS"


class ConfigError(ValueError):
    """Invalid experiment configuration; the message lists every violation."""


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run.

    Desk-scale defaults shrink the reference setup (100 runs of 10^6 steps)
    to 20 x 200k for the continuous-target table and 10 x 200k for the Ising
    sweeps, with burn-in at 10% of the iterations.
    """

    experiment: str
    samplers: tuple[str, ...] = SAMPLERS
    eta: int = 10
    eta_grid: tuple[int, ...] = (10, 20, 30, 40, 50)
    mu: float = 1.0
    mu_grid: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5)
    coupling: float = 0.5
    sigma_grid: tuple[float, ...] = (2.0, 2.2, 2.5)
    iterations: int = 200_000
    burn_in: Optional[int] = None
    replicates: Optional[int] = None
    seed: int = 0
    output_path: Optional[str] = None
    workers: Optional[int] = None
    instances: int = 200
    counterexample_sigma: float = 0.5
    counterexample_k_max: int = 10

    def effective_burn_in(self) -> int:
        return self.iterations // 10 if self.burn_in is None else self.burn_in

    def effective_replicates(self) -> int:
        if self.replicates is not None:
            return self.replicates
        return 10 if self.experiment.startswith("ising") else 20

    def violations(self) -> list[str]:
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(f"unknown experiment {self.experiment!r}, expected one of {EXPERIMENTS}")
        bad = [s for s in self.samplers if s not in SAMPLERS]
        if bad:
            problems.append(f"unknown samplers {bad}, expected a subset of {SAMPLERS}")
        if not self.samplers:
            problems.append("samplers must be non-empty")
        if self.iterations <= 0:
            problems.append(f"iterations must be positive, got {self.iterations}")
        burn = self.effective_burn_in()
        if not 0 <= burn < self.iterations:
            problems.append(f"need iterations > burn_in >= 0, got {self.iterations} and {burn}")
        if self.effective_replicates() < 1:
            problems.append(f"replicates must be >= 1, got {self.replicates}")
        if self.eta < 1 or any(e < 1 for e in self.eta_grid):
            problems.append("lattice sides must be >= 1")
        if self.coupling <= 0:
            problems.append(f"coupling must be positive, got {self.coupling}")
        if any(s <= 0 for s in self.sigma_grid):
            problems.append(f"sigma grid must be positive, got {self.sigma_grid}")
        if self.instances < 1:
            problems.append(f"instances must be >= 1, got {self.instances}")
        if not 0 <= self.seed < 2**64:
            problems.append(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        return problems

    def validated(self) -> "ExperimentConfig":
        problems = self.violations()
        if problems:
            raise ConfigError("invalid configuration:\n  - " + "\n  - ".join(problems))
        return self


_TUPLE_FIELDS = {"samplers", "eta_grid", "mu_grid", "sigma_grid"}


def load_config(path: str, **overrides) -> ExperimentConfig:
    """Read a JSON config file and apply keyword overrides (None values skipped)."""
    with open(path) as fh:
        raw = json.load(fh)
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"invalid configuration:\n  - unknown config fields {unknown}")
    for key in _TUPLE_FIELDS & set(raw):
        raw[key] = tuple(raw[key])
    cfg = ExperimentConfig(**raw)
    applied = {k: v for k, v in overrides.items() if v is not None}
    for key in _TUPLE_FIELDS & set(applied):
        applied[key] = tuple(applied[key])
    return replace(cfg, **applied) if applied else cfg


def resolve_workers(flag: Optional[int] = None) -> int:
    """Worker-count resolution: explicit flag, then LIFTED_MCMC_THREADS, then cpu count."""
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


# chain driver ----------------------------------------------------------------


def run_chain(
    sampler: str,
    proposal,
    x0,
    iterations: int,
    burn_in: int,
    f: Callable,
    rng: np.random.Generator,
    phi=METROPOLIS,
) -> ChainTrace:
    """Run one chain and collect post-burn-in functional values.

    The acceptance count covers post-burn-in steps; forced boundary moves
    count as rejections.
    """
    kept = iterations - burn_in
    values = np.empty(kept)
    accepted = 0
    if sampler == "lifted":
        state = LiftedState(x0, 1 if rng.random() < 0.5 else -1)
        for k in range(iterations):
            out = lifted_step(state, proposal, phi, rng)
            state = out.next_state
            if k >= burn_in:
                accepted += out.accepted
                values[k - burn_in] = f(state.position)
    else:
        step = mh_step if sampler == "mh" else rev_step
        state = x0
        for k in range(iterations):
            out = step(state, proposal, phi, rng)
            state = out.next_state
            if k >= burn_in:
                accepted += out.accepted
                values[k - burn_in] = f(state)
    return ChainTrace(values=values, accepted_count=accepted, total_steps=kept, burn_in=burn_in)


def _rng_from(master_seed: int, spawn_key: tuple[int, ...]) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=spawn_key)))


def _run_replicate(task: dict) -> dict:
    """Worker entry point: one replicate chain, batch-means reduced."""
    rng = _rng_from(task["master_seed"], tuple(task["spawn_key"]))
    model = task["model"]
    if model == "ising":
        params = ising.IsingParams(task["eta"], task["coupling"], np.asarray(task["field"]))
        proposal = ising.SingleFlipBarkerProposal(params)
        x0 = proposal.initial_state(rng)
        f = lambda lattice: float(ising.magnetisation(lattice))
    elif model == "barker":
        proposal = barker1d.BarkerDirectionalProposal(task["sigma"], barker1d.standard_normal_target())
        x0 = proposal.initial_state(rng)
        f = float
    elif model == "guided":
        proposal = barker1d.guided_walk_proposal(task["sigma"])
        x0 = proposal.initial_state(rng)
        f = float
    else:
        raise ValueError(f"unknown model {model!r}")
    trace = run_chain(task["sampler"], proposal, x0, task["iterations"], task["burn_in"], f, rng)
    mean, sd = task["standardize_mean"], task["standardize_sd"]
    trace.values = (trace.values - mean) / sd
    est = batch_means_variance(trace)
    return {
        "point": task["point"],
        "sampler": task["sampler"],
        "replicate": task["replicate"],
        "acc_rate": acceptance_rate(trace),
        "asym_var": est.value,
        "std_err": est.standard_error,
    }


def _ising_standardization(params: ising.IsingParams, master_seed: int, point_idx: int) -> tuple[float, float]:
    """Magnetisation mean/sd: exact for eta <= 3, else a pilot MH run (seed recorded
    as spawn key (2, point))."""
    if params.eta <= ising.MAX_ENUM_ETA:
        pi = ising.enumerate_target(params)
        mags = ising.enumerate_states(params.n).sum(axis=1).astype(float)
        mean = float(pi @ mags)
        sd = math.sqrt(float(pi @ (mags - mean) ** 2))
        return mean, sd
    rng = _rng_from(master_seed, (2, point_idx, 0, 0))
    proposal = ising.SingleFlipBarkerProposal(params)
    x0 = proposal.initial_state(rng)
    trace = run_chain(
        "mh", proposal, x0, PILOT_ITERATIONS, PILOT_BURN_IN,
        lambda lattice: float(ising.magnetisation(lattice)), rng,
    )
    mean = float(trace.values.mean())
    sd = float(trace.values.std())
    if sd <= 0.0:
        raise RuntimeError("pilot run produced a constant magnetisation trace")
    return mean, sd


def _experiment_points(cfg: ExperimentConfig) -> list[dict]:
    """One dict per parameter point: label, model, model parameters, standardization."""
    points = []
    if cfg.experiment == "barker_table":
        for idx, sigma in enumerate(cfg.sigma_grid):
            points.append({"label": f"sigma={sigma:g}", "model": "barker", "sigma": sigma,
                           "mean": 0.0, "sd": 1.0, "index": idx})
    elif cfg.experiment == "guided_walk":
        for idx, sigma in enumerate(cfg.sigma_grid):
            points.append({"label": f"sigma={sigma:g}", "model": "guided", "sigma": sigma,
                           "mean": 0.0, "sd": 1.0, "index": idx})
    elif cfg.experiment == "ising_mu_sweep":
        for idx, mu in enumerate(cfg.mu_grid):
            field_rng = _rng_from(cfg.seed, (1, idx, 0, 0))
            fld = ising.generate_external_field(cfg.eta, mu, field_rng)
            params = ising.IsingParams(cfg.eta, cfg.coupling, fld)
            mean, sd = _ising_standardization(params, cfg.seed, idx)
            points.append({"label": f"mu={mu:g}", "model": "ising", "eta": cfg.eta,
                           "field": fld.tolist(), "mean": mean, "sd": sd, "index": idx})
    elif cfg.experiment == "ising_eta_sweep":
        for idx, eta in enumerate(cfg.eta_grid):
            field_rng = _rng_from(cfg.seed, (1, idx, 0, 0))
            fld = ising.generate_external_field(eta, cfg.mu, field_rng)
            params = ising.IsingParams(eta, cfg.coupling, fld)
            mean, sd = _ising_standardization(params, cfg.seed, idx)
            points.append({"label": f"eta={eta}", "model": "ising", "eta": eta,
                           "field": fld.tolist(), "mean": mean, "sd": sd, "index": idx})
    else:
        raise ValueError(f"experiment {cfg.experiment!r} has no sampler points")
    return points


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class ExperimentResult:
    rows: list[dict]
    aggregates: list[dict]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for row in self.rows + self.aggregates:
            writer.writerow([
                row["experiment"], row["point"], row["sampler"], row["replicate"],
                _fmt(row.get("acc_rate")), _fmt(row.get("asym_var")),
                _fmt(row.get("std_err")), _fmt(row.get("bound")),
            ])
        return buf.getvalue()

    def aggregate(self, point: str, sampler: str, which: str = "mean") -> dict:
        for row in self.aggregates:
            if row["point"] == point and row["sampler"] == sampler and row["replicate"] == which:
                return row
        raise KeyError(f"no {which} aggregate for ({point}, {sampler})")


def _counterexample_result(cfg: ExperimentConfig) -> ExperimentResult:
    probes = barker1d.counterexample_scan(cfg.counterexample_sigma, range(0, cfg.counterexample_k_max + 1))
    rows = []
    for probe in probes:
        rows.append({"experiment": cfg.experiment, "point": f"k={probe.k:g}", "sampler": "mh",
                     "replicate": 0, "acc_rate": None, "asym_var": probe.p_mh,
                     "std_err": None, "bound": None})
        rows.append({"experiment": cfg.experiment, "point": f"k={probe.k:g}", "sampler": "rev",
                     "replicate": 0, "acc_rate": None, "asym_var": probe.p_rev,
                     "std_err": None, "bound": probe.ratio})
    return ExperimentResult(rows=rows, aggregates=[])


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (point, sampler, replicate) chain, aggregate, and write the CSV.

    Replicates execute on a process pool sized by ``resolve_workers``; results
    are ordered by task index so output bytes do not depend on scheduling.
    """
    cfg = cfg.validated()
    if cfg.experiment == "verify":
        raise ConfigError("invalid configuration:\n  - use verify_suite / the verify subcommand")
    if cfg.experiment == "counterexample":
        result = _counterexample_result(cfg)
        if cfg.output_path:
            with open(cfg.output_path, "w") as fh:
                fh.write(result.to_csv())
        return result

    points = _experiment_points(cfg)
    replicates = cfg.effective_replicates()
    burn = cfg.effective_burn_in()
    tasks = []
    for point in points:
        for s_idx, sampler in enumerate(cfg.samplers):
            for rep in range(replicates):
                task = {
                    "model": point["model"],
                    "point": point["label"],
                    "sampler": sampler,
                    "replicate": rep,
                    "iterations": cfg.iterations,
                    "burn_in": burn,
                    "master_seed": cfg.seed,
                    "spawn_key": (0, point["index"], s_idx, rep),
                    "standardize_mean": point["mean"],
                    "standardize_sd": point["sd"],
                }
                if point["model"] == "ising":
                    task.update(eta=point["eta"], coupling=cfg.coupling, field=point["field"])
                else:
                    task.update(sigma=point["sigma"])
                tasks.append(task)

    workers = resolve_workers(cfg.workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_replicate, tasks, chunksize=1))
    else:
        outcomes = [_run_replicate(t) for t in tasks]

    rows = [{"experiment": cfg.experiment, "bound": None, **out} for out in outcomes]

    aggregates = []
    has_bound = cfg.experiment in ("barker_table", "ising_mu_sweep", "ising_eta_sweep", "guided_walk")
    for point in points:
        label = point["label"]
        bound = None
        if has_bound and "mh" in cfg.samplers:
            mh_vars = [r["asym_var"] for r in rows if r["point"] == label and r["sampler"] == "mh"]
            bound = 2.0 * statistics.fmean(mh_vars) + 1.0
        for sampler in cfg.samplers:
            sub = [r for r in rows if r["point"] == label and r["sampler"] == sampler]
            variances = [r["asym_var"] for r in sub]
            rates = [r["acc_rate"] for r in sub]
            se_mean = statistics.stdev(variances) / math.sqrt(len(variances)) if len(variances) > 1 else 0.0
            aggregates.append({
                "experiment": cfg.experiment, "point": label, "sampler": sampler,
                "replicate": "mean", "acc_rate": statistics.fmean(rates),
                "asym_var": statistics.fmean(variances), "std_err": se_mean, "bound": bound,
            })
            aggregates.append({
                "experiment": cfg.experiment, "point": label, "sampler": sampler,
                "replicate": "median", "acc_rate": statistics.median(rates),
                "asym_var": statistics.median(variances), "std_err": None, "bound": bound,
            })

    result = ExperimentResult(rows=rows, aggregates=aggregates)
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(result.to_csv())
    return result


# verification suite -----------------------------------------------------------

STATIONARITY_TOL = 1e-10
DB_TOL = 1e-10
SKEWED_DB_TOL = 1e-10
PESKUN_TOL = -1e-12
CHAIN_SLACK = 1e-8
LAMBDA_BRIDGE = 0.9999
LAMBDA_GRID = (0.9, 0.99, 0.999, 0.9999)
LAMBDA_REL_TOL = 0.05
#: |var_lambda - var| is a difference of two positive decaying eigenvalue
#: contributions; when they nearly cancel, its sign can flip and strict
#: monotonicity fails even for reversible kernels. Below this relative floor
#: the bridge counts as converged and ordering noise is ignored.
LAMBDA_MONO_FLOOR = 1e-3


@dataclass
class VerifyReport:
    instances: int
    worst_stationarity: float
    worst_detailed_balance: float
    worst_skewed_db: float
    worst_peskun_margin: float
    worst_lambda_gap: float
    theorem1_violations: int
    violations: list[str]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> str:
        payload = {
            "instances": self.instances,
            "worst_stationarity": self.worst_stationarity,
            "worst_detailed_balance": self.worst_detailed_balance,
            "worst_skewed_db": self.worst_skewed_db,
            "worst_peskun_margin": self.worst_peskun_margin,
            "worst_lambda_gap": self.worst_lambda_gap,
            "theorem1_violations": self.theorem1_violations,
            "violations": self.violations,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _renormalized_corruption(kernel: exact.DenseKernel) -> exact.DenseKernel:
    m = kernel.matrix.copy()
    m[0, 1] += 1e-3
    m[0] /= m[0].sum()
    return exact.DenseKernel(m, kernel.space, kernel.n_base)


def _check_instance(
    name: str,
    inst: exact.FiniteInstance,
    fs: Sequence[np.ndarray],
    report: VerifyReport,
    check_lambda: bool = True,
    inject_fault: bool = False,
) -> None:
    mh = exact.build_mh_kernel(inst)
    rev = exact.build_rev_kernel(inst)
    lifted = exact.build_lifted_kernel(inst)
    if inject_fault:
        mh = _renormalized_corruption(mh)

    stat = max(
        exact.stationarity_residual(mh, inst.pi),
        exact.stationarity_residual(rev, inst.pi),
        exact.stationarity_residual(lifted, inst.pi),
    )
    report.worst_stationarity = max(report.worst_stationarity, stat)
    if stat > STATIONARITY_TOL:
        report.violations.append(f"{name}: stationarity residual {stat:.3e} > {STATIONARITY_TOL:.0e}")

    db = max(exact.detailed_balance_residual(mh, inst.pi), exact.detailed_balance_residual(rev, inst.pi))
    report.worst_detailed_balance = max(report.worst_detailed_balance, db)
    if db > DB_TOL:
        report.violations.append(f"{name}: detailed-balance residual {db:.3e} > {DB_TOL:.0e}")

    sdb = exact.skewed_db_residual(lifted, inst.pi)
    report.worst_skewed_db = max(report.worst_skewed_db, sdb)
    if sdb > SKEWED_DB_TOL:
        report.violations.append(f"{name}: skewed-detailed-balance residual {sdb:.3e} > {SKEWED_DB_TOL:.0e}")

    margin = exact.peskun_bound_margin(rev, mh)
    report.worst_peskun_margin = min(report.worst_peskun_margin, margin)
    if margin < PESKUN_TOL:
        report.violations.append(f"{name}: Peskun margin {margin:.3e} < {PESKUN_TOL:.0e}")

    for f_idx, f in enumerate(fs):
        var_f = float(np.sum(inst.pi * (f - inst.pi @ f) ** 2))
        try:
            var_mh = exact.asymptotic_variance_exact(mh, inst.pi, f)
            var_rev = exact.asymptotic_variance_exact(rev, inst.pi, f)
            var_lifted = exact.asymptotic_variance_exact(lifted, inst.pi, f)
        except exact.NonErgodicError as err:
            report.theorem1_violations += 1
            report.violations.append(f"{name}: variance solve failed for functional {f_idx}: {err}")
            continue
        if var_lifted > var_rev + CHAIN_SLACK or var_rev > 2 * var_mh + var_f + CHAIN_SLACK:
            report.theorem1_violations += 1
            report.violations.append(
                f"{name}: variance chain violated for functional {f_idx} "
                f"(lifted {var_lifted:.6g}, rev {var_rev:.6g}, bound {2 * var_mh + var_f:.6g})"
            )
        if not check_lambda:
            continue
        for kernel, var in ((mh, var_mh), (rev, var_rev), (lifted, var_lifted)):
            gap = abs(exact.lambda_variance_exact(kernel, inst.pi, f, LAMBDA_BRIDGE) - var)
            rel = gap / (1.0 + var)
            report.worst_lambda_gap = max(report.worst_lambda_gap, rel)
            if rel > LAMBDA_REL_TOL:
                report.violations.append(
                    f"{name}: lambda-limit gap {rel:.3e} > {LAMBDA_REL_TOL} for functional {f_idx}"
                )
        for kernel, var in ((mh, var_mh), (rev, var_rev)):
            gaps = [abs(exact.lambda_variance_exact(kernel, inst.pi, f, lam) - var) for lam in LAMBDA_GRID]
            floor = LAMBDA_MONO_FLOOR * (1.0 + abs(var))
            if any(
                gaps[i + 1] > gaps[i] + 1e-10 * (1.0 + abs(var)) and gaps[i + 1] > floor
                for i in range(len(gaps) - 1)
            ):
                report.violations.append(
                    f"{name}: lambda gap not monotone for reversible kernel, functional {f_idx}: {gaps}"
                )


def verify_suite(
    seed: int = 0,
    instance_count: int = 200,
    include_ising: bool = True,
    check_lambda: bool = True,
    inject_fault: bool = False,
) -> VerifyReport:
    """Run the exact certificate battery on random instances plus the exact
    Ising enumerations (eta in {1,2,3}, coupling 0.5, mu in {0,1,3})."""
    rng = np.random.default_rng(seed)
    report = VerifyReport(
        instances=0,
        worst_stationarity=0.0,
        worst_detailed_balance=0.0,
        worst_skewed_db=0.0,
        worst_peskun_margin=math.inf,
        worst_lambda_gap=0.0,
        theorem1_violations=0,
        violations=[],
    )
    for k in range(instance_count):
        inst = exact.random_instance(rng)
        fs = exact.standardized_test_functions(inst, rng)
        _check_instance(
            f"random[{k}] (n={inst.n})", inst, fs, report,
            check_lambda=check_lambda, inject_fault=inject_fault and k == 0,
        )
        report.instances += 1
    if include_ising:
        for eta in (1, 2, 3):
            for mu in (0.0, 1.0, 3.0):
                field_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(3, eta, int(mu * 10))))
                params = ising.IsingParams(eta, 0.5, ising.generate_external_field(eta, mu, field_rng))
                inst = ising.ising_finite_instance(params)
                mags = ising.enumerate_states(params.n).sum(axis=1).astype(float)
                mean = float(inst.pi @ mags)
                sd = math.sqrt(float(inst.pi @ (mags - mean) ** 2))
                fs = [(mags - mean) / sd] + exact.standardized_test_functions(inst, rng, count=4)
                _check_instance(f"ising[eta={eta},mu={mu:g}]", inst, fs, report, check_lambda=check_lambda)
                report.instances += 1
    if not np.isfinite(report.worst_peskun_margin):
        report.worst_peskun_margin = 0.0
    return report
