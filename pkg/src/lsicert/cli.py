"""Command-line front end.

Usage::

    lsicert <subcommand> --config run.toml [--seed N] [--samples N]
            [--sweeps N] [--out PATH] [--format json|csv] [--unchecked]

Every run writes one report. JSON reports have the top-level keys
``schema_version``, ``config_echo``, ``seed``, ``results``, ``flags`` and
``runtime_ms``; the last one is ``null`` unless ``--timing`` is given, so
repeated runs with the same config and seed are byte-identical.

Exit status: 0 on success, 1 on error, 2 when certification is refused.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import replace

import numpy as np

from . import certify
from .conditions import SamplerConfig, full_condition_report
from .config import SCHEMA_VERSION, RunConfig, load_config
from .errors import ConfigError, DeltaOutOfRange, LsiCertError, NotCertified
from .gibbs import contraction_rate_formula, run_trajectory
from .model import GaussianDensity, GaussianModel, GridDensity, build_gaussian

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REFUSED = 2

COMMANDS = (
    "check-conditions",
    "certify",
    "verify-theorem1",
    "simulate-gibbs",
    "sweep-delta",
    "pathological",
)
CSV_HEADER = ("multiplier", "delta", "t1_constant", "rate", "lsi_bound", "certified")


class Outcome:
    def __init__(self, results, flags, status=EXIT_OK, table=None):
        self.results = results
        self.flags = flags
        self.status = status
        self.table = table


def jsonable(obj):
    """Recursively convert numpy values; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _sampler(cfg: RunConfig) -> SamplerConfig:
    return SamplerConfig(count=cfg.run.samples, seed=cfg.run.seed, exhaustive=cfg.run.exhaustive)


def _report(cfg: RunConfig, model):
    return full_condition_report(model, _sampler(cfg), safety_factor=cfg.run.safety_factor)


def random_density(model, rng):
    """A random law compatible with ``model`` for verification suites."""
    if isinstance(model, GaussianModel):
        n = model.dim
        A = rng.normal(size=(n, n))
        cov = A @ A.T / n + rng.uniform(0.05, 1.0) * np.eye(n)
        return GaussianDensity(model.mean + rng.normal(scale=1.5, size=n), cov)
    logits = rng.normal(scale=rng.uniform(0.2, 2.0), size=model.shape)
    return GridDensity.from_log_weights(model.grids, logits)


def _initial_density(cfg: RunConfig, model):
    init = cfg.initial
    if isinstance(model, GaussianModel):
        if init is None or init.mean is None:
            mean = model.mean + 1.0
        else:
            mean = np.asarray(init.mean)
        cov = model.covariance if init is None or init.cov is None else np.asarray(init.cov)
        return GaussianDensity(mean, cov)
    if init is not None and init.masses is not None:
        return GridDensity.from_masses(model.grids, np.asarray(init.masses, dtype=float))
    if init is not None and init.point is not None:
        idx = tuple(model.indices(np.asarray(init.point, dtype=float)))
        masses = np.zeros(model.shape)
        masses[idx] = 1.0
        return GridDensity.from_masses(model.grids, masses)
    return GridDensity.from_masses(model.grids, np.ones(model.shape))


# -- subcommands ------------------------------------------------------------------


def cmd_check_conditions(cfg: RunConfig, unchecked: bool) -> Outcome:
    report = _report(cfg, cfg.build_model())
    return Outcome({"conditions": report.to_dict()}, {"certified": report.certified})


def cmd_certify(cfg: RunConfig, unchecked: bool) -> Outcome:
    model = cfg.build_model()
    report = _report(cfg, model)
    results = {"conditions": report.to_dict(), "delta": report.delta}
    try:
        bound = certify.lsi_bound(model, report, unchecked=unchecked)
    except (NotCertified, DeltaOutOfRange) as exc:
        results["refusal"] = {"code": exc.code, "message": str(exc)}
        return Outcome(results, {"certified": False}, EXIT_REFUSED)
    results["bound"] = bound.to_dict()
    flags = {"certified": report.certified, "unchecked": unchecked}
    if bound.comparison is not None:
        flags["bound_valid"] = bool(bound.lsi_bound <= bound.comparison + 1e-12)
    return Outcome(results, flags)


def cmd_verify_theorem1(cfg: RunConfig, unchecked: bool) -> Outcome:
    model = cfg.build_model()
    report = _report(cfg, model)
    results = {"conditions": report.to_dict(), "delta": report.delta}
    if report.delta <= 0:
        # no tensorization constant exists, so even an unchecked run has nothing to evaluate
        results["refusal"] = {"code": DeltaOutOfRange.code, "message": "delta <= 0: no constant to evaluate"}
        return Outcome(results, {"certified": False, "unchecked": unchecked}, EXIT_REFUSED)
    if not (report.certified or unchecked):
        results["refusal"] = {"code": NotCertified.code, "message": "hypotheses not certified"}
        return Outcome(results, {"certified": False, "unchecked": unchecked}, EXIT_REFUSED)
    rng = np.random.default_rng(cfg.run.seed)
    ratios, conj, worst = [], [], None
    violations = 0
    for k in range(cfg.run.trials):
        p = random_density(model, rng)
        check = certify.theorem1_verify(model, p, report, unchecked=unchecked)
        c = certify.conjecture_ratio(model, p, report, unchecked=unchecked)
        ratios.append(check.ratio)
        conj.append(c.ratio)
        if not check.holds:
            violations += 1
        if worst is None or check.ratio < worst["ratio"]:
            worst = {"trial": k, "lhs": check.lhs, "rhs": check.rhs, "ratio": check.ratio}
    results.update(
        {
            "t1_constant": certify.theorem1_constant(report.delta),
            "trials": cfg.run.trials,
            "min_ratio": min(ratios) if ratios else None,
            "worst": worst,
            "violations": violations,
            "conjecture_min_ratio": min(conj) if conj else None,
        }
    )
    flags = {"certified": report.certified, "unchecked": unchecked, "holds_all": violations == 0}
    return Outcome(results, flags)


def cmd_simulate_gibbs(cfg: RunConfig, unchecked: bool) -> Outcome:
    model = cfg.build_model()
    p = _initial_density(cfg, model)
    traj = run_trajectory(model, p, sweeps=cfg.run.sweeps)
    residuals = traj.telescoping_residuals()
    results = {
        "sweeps": traj.sweeps,
        "entropies": traj.entropies,
        "sweep_term_sums": [float(np.sum(e)) for e in traj.sweep_terms],
        "sweep_terms": [list(e) for e in traj.sweep_terms],
        "w_gaps": traj.w_gaps,
        "max_telescoping_residual": float(np.max(np.abs(residuals))) if residuals.size else 0.0,
        "cumulative_residual": traj.cumulative_residual() if traj.sweep_terms else 0.0,
        "decay_factors": traj.decay_factors(),
    }
    d = np.asarray(traj.entropies)
    flags = {
        "monotone": bool(np.all(np.diff(d) <= 1e-12 * np.maximum(d[:-1], 1.0))),
        "telescoping_ok": bool(results["max_telescoping_residual"] <= cfg.run.tolerance),
        "converged": bool(d[-1] < 1e-10),
    }
    return Outcome(results, flags)


def _sweep_family(cfg: RunConfig):
    m = cfg.model
    if m.type != "gaussian":
        raise ConfigError([(0, 0, "sweep-delta needs a gaussian model")])
    if cfg.sweep is None:
        raise ConfigError([(0, 0, "sweep-delta needs a [sweep] section")])
    J = np.asarray(m.precision, dtype=float)
    diag = np.diag(np.diag(J))
    if cfg.sweep.coupling is not None:
        return diag, np.asarray(cfg.sweep.coupling, dtype=float), m.linear
    coupling = J - diag
    peak = float(np.max(np.abs(coupling)))
    if peak == 0.0:
        coupling = np.ones_like(J) - np.eye(J.shape[0])
    else:
        coupling = coupling / peak
    return diag, coupling, m.linear


def sweep_delta(cfg: RunConfig) -> list:
    """One row per multiplier of the coupling: ``J(m) = diag(J) + m * C``.

    ``C`` is ``sweep.coupling`` when given, else the off-diagonal part of
    the model precision scaled to unit peak magnitude (all ones when the
    model has no coupling).
    """
    diag, coupling, linear = _sweep_family(cfg)
    rows = []
    for mult in sorted(cfg.sweep.values()):
        model = build_gaussian(diag + mult * coupling, linear)
        report = _report(cfg, model)
        delta = report.delta
        row = {"multiplier": mult, "delta": delta, "certified": report.certified}
        if delta > 0:
            row["t1_constant"] = certify.theorem1_constant(delta)
            row["rate"] = contraction_rate_formula(delta)
        else:
            row["t1_constant"] = row["rate"] = math.nan
        row["lsi_bound"] = (
            delta * (1 - delta / 2) * float(np.min(report.weights.rho)) if report.certified else math.nan
        )
        rows.append({k: row[k] for k in CSV_HEADER})
    return rows


def cmd_sweep_delta(cfg: RunConfig, unchecked: bool) -> Outcome:
    rows = sweep_delta(cfg)
    return Outcome({"rows": rows}, {"rows": len(rows)}, table=rows)


def cmd_pathological(cfg: RunConfig, unchecked: bool) -> Outcome:
    pc = cfg.pathological
    M, ns, scale = (1.0, [2, 5, 10], 1.0) if pc is None else (pc.M, pc.n, pc.scale)
    sampler = SamplerConfig(count=min(cfg.run.samples, 500), seed=cfg.run.seed)
    reports = [certify.pathological_example_report(M, n, scale, sampler) for n in ns]
    flags = {
        "refused_all": all(not r.certified for r in reports),
        "lambda_min_one": all(abs(r.lambda_min - 1.0) <= 1e-9 for r in reports),
    }
    return Outcome({"cases": [r.to_dict() for r in reports]}, flags)


HANDLERS = {
    "check-conditions": cmd_check_conditions,
    "certify": cmd_certify,
    "verify-theorem1": cmd_verify_theorem1,
    "simulate-gibbs": cmd_simulate_gibbs,
    "sweep-delta": cmd_sweep_delta,
    "pathological": cmd_pathological,
}


def run_subcommand(cfg: RunConfig, command: str, unchecked: bool = False) -> Outcome:
    if command not in HANDLERS:
        raise ValueError(f"unknown subcommand {command!r}")
    return HANDLERS[command](cfg, unchecked)


# -- rendering ----------------------------------------------------------------------


def render_json(cfg: RunConfig, outcome: Outcome, runtime_ms) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config_echo": cfg.to_dict(),
        "seed": cfg.run.seed,
        "results": outcome.results,
        "flags": outcome.flags,
        "runtime_ms": runtime_ms,
    }
    return json.dumps(jsonable(doc), indent=2, allow_nan=False) + "\n"


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def render_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_csv_cell(row[k]) for k in CSV_HEADER])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsicert",
        description="Certify entropy tensorization and LSI bounds for weakly dependent models.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--sweeps", type=int)
    parser.add_argument("--out", help="report path (default: stdout or output.path)")
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--unchecked", action="store_true", help="evaluate without certified hypotheses")
    parser.add_argument("--timing", action="store_true", help="record wall-clock runtime in the report")
    return parser


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    run = cfg.run
    for name in ("seed", "samples", "sweeps"):
        value = getattr(args, name)
        if value is not None:
            run = replace(run, **{name: value})
    output = cfg.output
    if args.out is not None:
        output = replace(output, path=args.out)
    if args.format is not None:
        output = replace(output, format=args.format)
    return replace(cfg, run=run, output=output)


def _fail(message: str, code: str) -> int:
    print(f"error [{code}]: {message}", file=sys.stderr)
    return EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        for line, col, msg in exc.errors:
            print(f"{args.config}:{line}:{col}: {msg} [{exc.code}]", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        return _fail(str(exc), "IO_ERROR")

    start = time.perf_counter()
    try:
        outcome = run_subcommand(cfg, args.command, unchecked=args.unchecked)
    except LsiCertError as exc:
        return _fail(str(exc), exc.code)
    runtime_ms = round((time.perf_counter() - start) * 1000.0, 3) if args.timing else None

    if cfg.output.format == "csv":
        if outcome.table is None:
            return _fail(f"{args.command} has no tabular output; use --format json", "FORMAT")
        text = render_csv(outcome.table)
    else:
        text = render_json(cfg, outcome, runtime_ms)

    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
