"""Command-line front end: steady states, trajectories, sweeps, optimization.

Subcommands: steady | dynamics | sweep | optimize | thresholds. Output is
delimited text (comma) with '#'-prefixed metadata lines ahead of the header,
or JSON with field names identical to the CSV columns. Every float is
emitted with full round-trip precision, and a given config (including the
seed) always produces byte-identical output.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .dynamics import (
    DEFAULT_SEED_LEVEL,
    IntegratorConfig,
    IntegratorError,
    integrate,
    prevalences,
    seed_state,
    verify_global_stability,
)
from .model import (
    Allocation,
    ModelParams,
    ParameterError,
    SolverConfig,
    SolverError,
    full_steady_state,
    no_rumor_positivity_readings,
)
from .planner import (
    FeasibilityError,
    compute_thresholds,
    maximize_platform,
    maximize_truth_targeted,
    maximize_truth_uniform,
    minimize_rumor,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

OBJECTIVES = ("rumor-min", "truth", "truth-targeted", "platform")
AXES = ("alpha", "lambda", "x", "A")


class ConfigError(ValueError):
    """The command line describes an invalid or inconsistent run."""


@dataclass
class RunConfig:
    command: str
    lam: float | None = None
    nu: float | None = None
    k: float | None = None
    delta: float | None = None
    x: float | None = None
    alpha: float | None = None
    alpha0: float | None = None
    alpha1: float | None = None
    A: float | None = None
    objective: str | None = None
    axis: str | None = None
    start: float | None = None
    stop: float | None = None
    steps: int = 101
    starts: int | None = None
    init: float = DEFAULT_SEED_LEVEL
    seed: int = 0
    fmt: str = "csv"
    out: str | None = None
    jobs: int = 1
    tol: float | None = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rumor-inspect",
        description="Steady states, dynamics, and budgeted inspection planning "
        "for the two-message diffusion model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, help="diffusion rate nu*k/delta")
    common.add_argument("--nu", type=float, help="per-contact transmission rate")
    common.add_argument("--k", type=float, help="meetings per period")
    common.add_argument("--delta", type=float, help="death/replacement rate")
    common.add_argument("--x", type=float, help="mass of truth-biased agents")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=str, default=None)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--tol", type=float, default=None)

    alloc = argparse.ArgumentParser(add_help=False)
    alloc.add_argument("--alpha", type=float, help="uniform inspection rate")
    alloc.add_argument("--alpha0", type=float, help="inspection rate of truth-biased agents")
    alloc.add_argument("--alpha1", type=float, help="inspection rate of rumor-biased agents")

    sub.add_parser("steady", parents=[common, alloc])

    p_dyn = sub.add_parser("dynamics", parents=[common, alloc])
    p_dyn.add_argument("--starts", type=int, default=None, help="verify stability from this many random starts")
    p_dyn.add_argument("--init", type=float, default=DEFAULT_SEED_LEVEL, help="initial believing fraction per group")

    p_sweep = sub.add_parser("sweep", parents=[common, alloc])
    p_sweep.add_argument("--axis", choices=AXES, required=True)
    p_sweep.add_argument("--start", type=float, default=None)
    p_sweep.add_argument("--stop", type=float, default=None)
    p_sweep.add_argument("--steps", type=int, default=101)
    p_sweep.add_argument("--objective", choices=OBJECTIVES, default=None)
    p_sweep.add_argument("--A", type=float, default=None)

    p_opt = sub.add_parser("optimize", parents=[common])
    p_opt.add_argument("--objective", choices=OBJECTIVES, required=True)
    p_opt.add_argument("--A", type=float, required=True)

    sub.add_parser("thresholds", parents=[common])
    return parser


def _run_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for name in vars(cfg):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


def _solver_config(cfg: RunConfig) -> SolverConfig:
    try:
        return SolverConfig(tol=cfg.tol) if cfg.tol is not None else SolverConfig()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _params(cfg: RunConfig, *, lam_override: float | None = None, x_override: float | None = None) -> ModelParams:
    x = x_override if x_override is not None else cfg.x
    if x is None:
        raise ConfigError("--x is required")
    rates = (cfg.nu, cfg.k, cfg.delta)
    try:
        if lam_override is not None:
            if cfg.lam is not None or any(r is not None for r in rates):
                raise ConfigError("the swept diffusion rate cannot also be fixed on the command line")
            return ModelParams.from_lambda(lam_override, x)
        if cfg.lam is not None:
            if any(r is not None for r in rates):
                raise ConfigError("give either --lambda or the full --nu/--k/--delta triple, not both")
            return ModelParams.from_lambda(cfg.lam, x)
        if all(r is not None for r in rates):
            return ModelParams.from_rates(cfg.nu, cfg.k, cfg.delta, x)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("model parameters missing: give --lambda or all of --nu/--k/--delta")


def _allocation(cfg: RunConfig) -> Allocation:
    targeted = cfg.alpha0 is not None or cfg.alpha1 is not None
    try:
        if cfg.alpha is not None:
            if targeted:
                raise ConfigError("give either --alpha or --alpha0/--alpha1, not both")
            return Allocation.uniform(cfg.alpha)
        if cfg.alpha0 is not None and cfg.alpha1 is not None:
            return Allocation.targeted(cfg.alpha0, cfg.alpha1)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("allocation missing: give --alpha or both --alpha0 and --alpha1")


def _forbid_allocation(cfg: RunConfig, why: str) -> None:
    if cfg.alpha is not None or cfg.alpha0 is not None or cfg.alpha1 is not None:
        raise ConfigError(f"allocation flags are not allowed {why}")


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

STEADY_FIELDS = ("theta0", "theta1", "theta", "rho_00_a", "rho_10_a", "rho_00_na", "rho_11_na", "eradicated")


def steady_record(p: ModelParams, a: Allocation, solver: SolverConfig) -> dict:
    ss = full_steady_state(p, a, solver)
    return {
        "theta0": ss.theta0,
        "theta1": ss.theta1,
        "theta": ss.theta,
        "rho_00_a": ss.rho_00_a,
        "rho_10_a": ss.rho_10_a,
        "rho_00_na": ss.rho_00_na,
        "rho_11_na": ss.rho_11_na,
        "eradicated": ss.theta1 == 0.0,
    }


def optimize_record(p: ModelParams, objective: str, A: float, solver: SolverConfig) -> dict:
    if objective == "rumor-min":
        res = minimize_rumor(p, A)
    elif objective == "truth":
        res = maximize_truth_uniform(p, A, solver)
    elif objective == "truth-targeted":
        res = maximize_truth_targeted(p, A, solver)
    elif objective == "platform":
        res = maximize_platform(p, A, solver)
    else:
        raise ConfigError(f"unknown objective {objective!r}")
    return {
        "mode": res.allocation.mode,
        "alpha0": res.allocation.alpha0,
        "alpha1": res.allocation.alpha1,
        "objective": res.objective,
        "budget_spent": res.budget_spent,
        "slack": res.slack,
        "rumor_eradicated": res.rumor_eradicated,
    }


def sweep_records(cfg: RunConfig, solver: SolverConfig) -> tuple[list[str], list[dict]]:
    axis = cfg.axis
    lo, hi = cfg.start, cfg.stop
    if axis in ("alpha", "x", "A"):
        lo = 0.0 if lo is None else lo
        hi = 1.0 if hi is None else hi
    if lo is None or hi is None:
        raise ConfigError(f"--start and --stop are required for axis {axis!r}")
    if cfg.steps < 2:
        raise ConfigError(f"sweep needs at least 2 steps, got {cfg.steps}")
    if not lo < hi:
        raise ConfigError(f"--start must be below --stop, got [{lo}, {hi}]")
    if axis in ("alpha", "x") and not (0.0 <= lo and hi <= 1.0):
        raise ConfigError(f"{axis} sweep range must stay inside [0, 1], got [{lo}, {hi}]")
    if axis in ("lambda", "A") and lo < 0.0:
        raise ConfigError(f"{axis} sweep range must be nonnegative, got start {lo}")
    values = [float(v) for v in np.linspace(lo, hi, cfg.steps)]

    if axis == "alpha":
        _forbid_allocation(cfg, "when sweeping alpha")
        p = _params(cfg)
        work = [(v, p, Allocation.uniform(v)) for v in values]
    elif axis == "lambda":
        a = _allocation(cfg)
        if values[0] <= 0.0:
            raise ConfigError("lambda sweep must start above 0")
        work = [(v, _params(cfg, lam_override=v), a) for v in values]
    elif axis == "x":
        if cfg.x is not None:
            raise ConfigError("the swept x cannot also be fixed on the command line")
        a = _allocation(cfg)
        work = [(v, _params(cfg, x_override=v), a) for v in values]
    else:  # axis == "A": one optimization per budget
        _forbid_allocation(cfg, "when sweeping the budget")
        if cfg.objective is None:
            raise ConfigError("--objective is required when sweeping the budget")
        p = _params(cfg)

        def run_budget(v: float) -> dict:
            return {"A": v, **optimize_record(p, cfg.objective, v, solver)}

        rows = _pmap(run_budget, values, cfg.jobs)
        return (["A", "mode", "alpha0", "alpha1", "objective", "budget_spent", "slack", "rumor_eradicated"], rows)

    def run_point(item) -> dict:
        v, p, a = item
        return {axis: v, **steady_record(p, a, solver)}

    rows = _pmap(run_point, work, cfg.jobs)
    return ([axis, *STEADY_FIELDS], rows)


def _pmap(fn, items, jobs: int) -> list:
    if jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {jobs}")
    if jobs == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _config_echo(cfg: RunConfig) -> dict:
    # everything that affects the computed values; the destination does not
    return {k: v for k, v in asdict(cfg).items() if v is not None and k != "out"}


def emit(header: list[str], rows: list[dict], cfg: RunConfig, summary: dict | None = None) -> str:
    if cfg.fmt == "json":
        doc = {
            "tool": "rumor-inspect",
            "version": __version__,
            "config": _config_echo(cfg),
            "rows": rows,
        }
        if summary is not None:
            doc["summary"] = summary
        text = json.dumps(doc, indent=2, allow_nan=True) + "\n"
    else:
        lines = [
            f"# rumor-inspect {__version__}",
            "# config: " + json.dumps(_config_echo(cfg), sort_keys=True),
            ",".join(header),
        ]
        lines += [",".join(_fmt(row[h]) for h in header) for row in rows]
        if summary is not None:
            lines += [f"# {key}: {_fmt(val)}" for key, val in summary.items()]
        text = "\n".join(lines) + "\n"

    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def run_steady(cfg: RunConfig) -> int:
    solver = _solver_config(cfg)
    p = _params(cfg)
    a = _allocation(cfg)
    emit(list(STEADY_FIELDS), [steady_record(p, a, solver)], cfg)
    return EXIT_OK


def run_sweep(cfg: RunConfig) -> int:
    solver = _solver_config(cfg)
    header, rows = sweep_records(cfg, solver)
    emit(header, rows, cfg)
    return EXIT_OK


def run_optimize(cfg: RunConfig) -> int:
    solver = _solver_config(cfg)
    p = _params(cfg)
    if cfg.A is None or cfg.A < 0.0:
        raise ConfigError(f"--A must be >= 0, got {cfg.A}")
    row = optimize_record(p, cfg.objective, cfg.A, solver)
    thr = compute_thresholds(p, solver)
    row.update(_threshold_fields(thr))
    header = list(row.keys())
    emit(header, [row], cfg)
    return EXIT_OK


def _threshold_fields(thr) -> dict:
    lo, hi = thr.eradication_interval if thr.eradication_interval else (None, None)
    return {
        "alpha_prime": thr.alpha_prime,
        "lambda_bar": thr.lambda_bar,
        "interval_lo": lo,
        "interval_hi": hi,
        "A_lower": thr.A_lower,
        "A_upper": thr.A_upper,
        "A_tilde": thr.A_tilde,
    }


def run_thresholds(cfg: RunConfig) -> int:
    solver = _solver_config(cfg)
    p = _params(cfg)
    row = _threshold_fields(compute_thresholds(p, solver))
    reading, alt = no_rumor_positivity_readings(p)
    row["positivity_alpha"] = reading
    row["positivity_alpha_alt"] = alt
    emit(list(row.keys()), [row], cfg)
    return EXIT_OK


def run_dynamics(cfg: RunConfig) -> int:
    p = _params(cfg)
    a = _allocation(cfg)
    integ = IntegratorConfig(conv_tol=cfg.tol) if cfg.tol is not None else IntegratorConfig()
    if not 0.0 <= cfg.init <= 1.0:
        raise ConfigError(f"--init must lie in [0, 1], got {cfg.init}")
    traj = integrate(seed_state(p, a, cfg.init), p, a, integ, store_every=10)
    rows = []
    for s in traj.states:
        th0, th1 = prevalences(s, p, a)
        rows.append(
            {
                "t": s.t,
                "r00a": s.r00a,
                "r00na": s.r00na,
                "r10a": s.r10a,
                "r11na": s.r11na,
                "theta0": th0,
                "theta1": th1,
            }
        )
    summary = {
        "status": traj.status,
        "t_final": traj.final.t,
        "max_rate": traj.max_rate,
    }
    ok = traj.converged
    if cfg.starts is not None:
        report = verify_global_stability(p, a, cfg.starts, integ, seed=cfg.seed, jobs=cfg.jobs)
        summary["stability_passed"] = report.passed
        summary["stability_max_gap"] = report.max_gap
        ok = ok and report.passed
    emit(["t", "r00a", "r00na", "r10a", "r11na", "theta0", "theta1"], rows, cfg, summary=summary)
    if not ok:
        print("dynamics did not certify convergence; see summary", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


COMMANDS = {
    "steady": run_steady,
    "dynamics": run_dynamics,
    "sweep": run_sweep,
    "optimize": run_optimize,
    "thresholds": run_thresholds,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed its message
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    cfg = _run_config(ns)
    try:
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, ParameterError, FeasibilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, IntegratorError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
