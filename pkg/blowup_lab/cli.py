"""
blowup-lab — Command Line Front Door
    blowup-lab <crossing|cdf|simulate|validate> [--config FILE] [--model.c1 F] …

Rows go to --out (or stdout) as CSV or JSONL; logs go to stderr.
Exit status: 0 ok, 1 validation FAIL rows, 2 config error, 3 numeric error.
"""
import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from typing import IO, Dict, Iterator, List, Optional, Sequence

import structlog

from .barrier_crossing import (
    BridgePin,
    Horizon,
    LinearBarrier,
    bm_crossing_finite,
    bm_crossing_infinite,
    bridge_crossing,
)
from .blowup_cdf import CdfPoint, Regime, blowup_cdf_curve, regime_of
from .config import SECTIONS, Command, JobConfig, OutputFormat, dump_config, load_job
from .errors import BlowupLabError, ConfigError, ExitStatus
from .monte_carlo import PathEnsembleResult, mc_blowup_cdf
from .settings import configure_logging, get_settings

logger = structlog.get_logger(__name__)

Z_THRESHOLD = 3.0

COLUMNS: Dict[Command, List[str]] = {
    Command.CROSSING: ["orientation", "a", "b", "r", "T", "x", "probability", "formula"],
    Command.CDF:      ["r", "probability", "regime", "quad_error"],
    Command.SIMULATE: ["r", "estimate", "std_error", "ci_lo", "ci_hi", "n_paths", "dt", "seed"],
    Command.VALIDATE: ["r", "analytic", "mc_estimate", "mc_std_error", "z_score", "verdict"],
}

# flags whose names differ from their config key
FLAG_ALIASES = {"out": "output.path", "format": "output.format",
                "r_from": "r_from", "r_to": "r_to", "r_steps": "r_steps"}


# ─── Validation rows ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ValidationRow:
    r:            float
    analytic:     float
    mc_estimate:  float
    mc_std_error: float
    z_score:      float
    verdict:      str

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"


@dataclass(frozen=True)
class ValidationReport:
    rows: List[ValidationRow]

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)


def z_score(analytic: float, quad_error: float, mc: PathEnsembleResult) -> float:
    """
    (mc − analytic) / s.e., where s.e. is the larger of the ensemble's own
    binomial error and the binomial error implied by the analytic value.
    Differences inside the quadrature error count as zero.
    """
    diff = mc.estimate - analytic
    if abs(diff) <= quad_error:
        return 0.0
    se = max(mc.std_error, math.sqrt(analytic * (1.0 - analytic) / mc.n_paths))
    if se == 0.0:
        return math.copysign(math.inf, diff)
    return diff / se


# ─── Commands ─────────────────────────────────────────────────────────────────

def run_crossing(job: JobConfig) -> List[dict]:
    c = job.crossing
    barrier = LinearBarrier(c.a, c.b, c.orientation)
    horizon = Horizon(c.r)
    if c.T is None:
        plus = barrier.to_plus()
        if horizon.is_finite:
            probability, formula = bm_crossing_finite(plus, horizon), "bm_finite"
        else:
            probability, formula = bm_crossing_infinite(plus), "bm_infinite"
    else:
        pin = BridgePin(c.T, c.x)
        probability = bridge_crossing(barrier.to_minus(), horizon, pin)
        formula = {Regime.BEFORE_T: "bridge_before_pin", Regime.AT_T: "bridge_at_pin",
                   Regime.AFTER_T: "bridge_after_pin"}[regime_of(c.r, c.T)]
    return [{"orientation": c.orientation.value, "a": c.a, "b": c.b, "r": c.r,
             "T": "" if c.T is None else c.T, "x": c.x,
             "probability": probability, "formula": formula}]


def _cdf_points(job: JobConfig) -> List[CdfPoint]:
    params = job.model.to_params()
    positive = [r for r in job.r_grid if r > 0.0]
    settings = get_settings()
    points = {p.r: p for p in blowup_cdf_curve(positive, params, job.g.to_spec(),
                                               job.quad.to_config(), settings.threads)}
    # P(τ <= 0) = 0: the barrier starts strictly above W_0 = 0
    return [points.get(r) or CdfPoint(r, 0.0, Regime.BEFORE_T, 0.0) for r in job.r_grid]


def run_cdf(job: JobConfig) -> List[dict]:
    rows = []
    for point in _cdf_points(job):
        if not point.ok:
            logger.error("cli.cdf_point_failed", r=point.r, status=point.status.value, message=point.message)
        rows.append({"r": point.r, "probability": point.probability,
                     "regime": point.regime.value, "quad_error": point.quadrature_error_estimate,
                     "_ok": point.ok})
    return rows


def _simulate_one(job: JobConfig, r: float) -> PathEnsembleResult:
    if r == 0.0:
        return PathEnsembleResult.from_count(0, job.mc.paths, job.mc.seed, job.mc.dt)
    return mc_blowup_cdf(r, job.model.to_params(), job.g.to_spec(), job.mc.paths,
                         job.mc.dt, job.mc.seed, job.mc.bridge_correction)


def run_simulate(job: JobConfig) -> List[dict]:
    rows = []
    for r in job.r_grid:
        res = _simulate_one(job, r)
        rows.append({"r": r, "estimate": res.estimate, "std_error": res.std_error,
                     "ci_lo": res.ci95[0], "ci_hi": res.ci95[1], "n_paths": res.n_paths,
                     "dt": res.dt, "seed": res.seed})
    return rows


def validate(job: JobConfig) -> ValidationReport:
    rows = []
    for point in _cdf_points(job):
        if not point.ok:
            raise BlowupLabError(f"analytic CDF failed at r={point.r!r}: {point.message}")
        mc = _simulate_one(job, point.r)
        z = z_score(point.probability, point.quadrature_error_estimate, mc)
        verdict = "PASS" if abs(z) <= Z_THRESHOLD else "FAIL"
        if verdict == "FAIL":
            logger.warning("cli.validate_fail", r=point.r, analytic=point.probability,
                           mc=mc.estimate, z=z)
        rows.append(ValidationRow(point.r, point.probability, mc.estimate, mc.std_error, z, verdict))
    return ValidationReport(rows)


def run_validate(job: JobConfig) -> List[dict]:
    report = validate(job)
    if not report.all_passed:
        logger.warning("cli.validate_report", failed=sum(not row.passed for row in report.rows),
                       total=len(report.rows))
    return [{**row.__dict__, "_ok": row.passed} for row in report.rows]


RUNNERS = {
    Command.CROSSING: run_crossing,
    Command.CDF:      run_cdf,
    Command.SIMULATE: run_simulate,
    Command.VALIDATE: run_validate,
}


# ─── Output ───────────────────────────────────────────────────────────────────

def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_rows(rows: Sequence[dict], columns: Sequence[str], fmt: OutputFormat, stream: IO[str]) -> None:
    if fmt is OutputFormat.CSV:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])
    else:
        for row in rows:
            stream.write(json.dumps({c: row[c] for c in columns}) + "\n")


@contextmanager
def _open_output(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None:
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


# ─── Argument parsing ─────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blowup-lab",
        description="Explosion-time distribution of the anticipating random fatigue equation.",
    )
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", metavar="FILE", help="key=value job file")
    parser.add_argument("--dump-config", action="store_true", help="print the resolved job and exit")

    grid = parser.add_argument_group("r grid")
    grid.add_argument("--r", dest="r", metavar="LIST", help="comma separated r values")
    grid.add_argument("--r-from", dest="r_from", metavar="F")
    grid.add_argument("--r-to", dest="r_to", metavar="F")
    grid.add_argument("--r-steps", dest="r_steps", metavar="N")

    for section, model in SECTIONS.items():
        if section == "output":
            continue
        group = parser.add_argument_group(section)
        for name in model.model_fields:
            group.add_argument(f"--{section}.{name}", dest=f"{section}.{name}", metavar="V")

    parser.add_argument("--out", dest="out", metavar="FILE")
    parser.add_argument("--format", dest="format", choices=[f.value for f in OutputFormat])
    return parser


def overrides_from(ns: argparse.Namespace) -> Dict[str, Optional[str]]:
    values = vars(ns)
    out: Dict[str, Optional[str]] = {"command": values["command"]}
    for section, model in SECTIONS.items():
        if section != "output":
            out.update({f"{section}.{n}": values[f"{section}.{n}"] for n in model.model_fields})
    for flag, key in FLAG_ALIASES.items():
        out[key] = values[flag]
    out["r"] = values["r"]
    return out


# ─── Entry point ──────────────────────────────────────────────────────────────

def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    configure_logging(settings.log_level, settings.log_json)

    ns = build_parser().parse_args(argv)
    try:
        job = load_job(ns.config, overrides_from(ns))
    except ConfigError as e:
        logger.error("cli.config_error", error=str(e), line=e.line, field=e.field)
        return int(e.exit_status)

    if ns.dump_config:
        sys.stdout.write(dump_config(job))
        return int(ExitStatus.OK)

    logger.info("cli.run", command=job.command.value, r_grid=list(job.r_grid))
    try:
        rows = RUNNERS[job.command](job)
    except BlowupLabError as e:
        logger.error("cli.numeric_error", command=job.command.value, error=str(e))
        return int(e.exit_status)

    with _open_output(job.output.path) as stream:
        write_rows(rows, COLUMNS[job.command], job.output.format, stream)

    if not all(row.get("_ok", True) for row in rows):
        failed = [row["r"] for row in rows if not row["_ok"]]
        if job.command is Command.VALIDATE:
            return int(ExitStatus.VALIDATION_FAILED)
        logger.error("cli.failed_rows", failed_r=failed)
        return int(ExitStatus.NUMERIC_ERROR)
    return int(ExitStatus.OK)
