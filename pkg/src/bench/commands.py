"""Benchmark commands shared by the CLI and the HTTP API."""
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ..config import get_settings
from ..linops.operator import SpectralSummary, load_matrix, spectral_summary
from ..lyapunov.contraction import LyapunovRecord, verify_contraction, verify_per_step
from ..lyapunov.reference import ReferenceSolution, solve_reference
from ..solvers.base import AlgorithmId, CompositeProblem, SolverState, StopRule
from ..solvers.runner import init, run
from ..solvers.steps import step
from ..tuning.rates import RateBound, complexity_trend, iterations_bound, iterations_exact, rate_for
from ..tuning.stepsizes import (Regime, StepSizes, check_feasible, stepsizes_balanced, stepsizes_classical,
                                stepsizes_for)
from ..utils.errors import InfeasibleStepsizeError
from ..utils.metrics import OracleCounter
from .experiment import ExperimentConfig
from .generators import generate_problem
from .traces import TraceMetadata, write_trace

REDUCTION_ITERS = 50
REDUCTION_TOL = 1e-12
REDUCTIONS = (
    (AlgorithmId.APGD, AlgorithmId.PGD),
    (AlgorithmId.ACV1, AlgorithmId.CV1),
    (AlgorithmId.ACV2, AlgorithmId.CV2),
)
DEFAULT_CONDITIONING_SWEEP = (4.0, 16.0, 64.0, 256.0)
DEFAULT_LAM_MIN_SWEEP = (1.0, 0.25, 0.0625)
TREND_FACTOR = 4.0


@dataclass
class RunOutcome:
    alg: AlgorithmId
    stepsizes: StepSizes
    rate: RateBound
    state: SolverState
    trace: List[LyapunovRecord]
    counter: OracleCounter

    @property
    def iterations(self) -> int:
        return self.trace[-1].k - self.trace[0].k

    def iters_to_eps(self, eps: float) -> Optional[int]:
        """First k with value_k <= eps * value_0"""
        return iterations_to_eps(self.trace, eps)


def iterations_to_eps(trace: Sequence[LyapunovRecord], eps: float) -> Optional[int]:
    if not trace:
        return None
    target = eps * trace[0].value
    for rec in trace:
        if rec.value <= target:
            return rec.k - trace[0].k
    return None


def total_oracle_calls(outcomes: Sequence[RunOutcome]) -> OracleCounter:
    total = OracleCounter()
    for outcome in outcomes:
        total.merge(outcome.counter)
    return total


def build_problem(config: ExperimentConfig, **changes: Any) -> CompositeProblem:
    """Generate the config's problem instance, with optional changed constants"""
    params = config.problem.model_dump()
    params.update(changes)
    return generate_problem(**params)


def resolve_stepsizes(problem: CompositeProblem, alg: AlgorithmId, config: ExperimentConfig) -> StepSizes:
    """
    Stepsizes for one algorithm: corollary rules for accelerated methods, classical ones for
    baselines, then the config overrides; refused when a contraction constraint fails

    Raises:
        InfeasibleStepsizeError: Overrides (or the problem constants) break a constraint
    """
    regime = config.problem.regime
    if not alg.is_accelerated:
        steps = stepsizes_classical(alg, problem.L_f, problem.K_norm)
    else:
        try:
            steps = stepsizes_for(problem, regime)
        except InfeasibleStepsizeError:
            if problem.mu_g > 0:
                raise
            logger.warning(f"mu_g = 0: no linear rate for {alg.label}, using balanced stepsizes")
            steps = stepsizes_balanced(regime, problem.L_f, problem.K_norm)

    overrides = config.stepsizes.overrides()
    if overrides:
        steps = steps.with_values(**overrides)
    check_feasible(steps, problem.L_f, problem.K_norm)
    return steps


def execute_run(problem: CompositeProblem, alg: AlgorithmId, stepsizes: StepSizes,
                reference: ReferenceSolution, config: ExperimentConfig,
                value_tol: Optional[float] = None) -> RunOutcome:
    counter = OracleCounter()
    state0 = init(problem, alg, np.zeros(problem.d_x), counter=counter)
    rate = rate_for(problem, stepsizes)
    stop = StopRule(max_iters=config.run.max_iters, kkt_tol=config.run.kkt_tol, value_tol=value_tol)
    state, trace = run(problem, alg, stepsizes, state0, stop, reference=reference, rate=rate,
                       counter=counter, record_wall_time=config.run.record_wall_time)
    return RunOutcome(alg=alg, stepsizes=stepsizes, rate=rate, state=state, trace=trace, counter=counter)


def _execute_all(problem: CompositeProblem, config: ExperimentConfig,
                 value_tol: Optional[float] = None) -> Tuple[ReferenceSolution, List[RunOutcome]]:
    """Resolve every algorithm's stepsizes first, then run them concurrently"""
    plans = [(alg, resolve_stepsizes(problem, alg, config)) for alg in config.algorithms]
    reference = solve_reference(problem)
    workers = max(1, min(get_settings().MAX_WORKERS, len(plans)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(execute_run, problem, alg, steps, reference, config, value_tol)
                   for alg, steps in plans]
        outcomes = [f.result() for f in futures]
    totals = total_oracle_calls(outcomes)
    logger.info(f"Oracle calls across {len(outcomes)} runs: {totals.as_dict()}")
    return reference, outcomes


def _metadata(config: ExperimentConfig, problem: CompositeProblem, reference: ReferenceSolution,
              outcome: RunOutcome) -> TraceMetadata:
    p, eps = config.problem, config.run.epsilon
    return TraceMetadata(
        algorithm=outcome.alg.label,
        regime=p.regime.value,
        seed=p.seed,
        iterations=outcome.iterations,
        stepsizes=outcome.stepsizes.as_dict(),
        rate=outcome.rate.as_dict(),
        constants=problem.constants(),
        problem={
            "f": problem.f.describe(),
            "g": problem.g.describe(),
            "h": problem.h.describe() if problem.h is not None else None,
        },
        oracle_calls=outcome.counter.as_dict(),
        reference_method=reference.method,
        final_kkt=outcome.trace[-1].kkt,
        predicted_iterations=iterations_bound(outcome.rate, eps),
        complexity_trend=complexity_trend(problem, p.regime, eps),
        no_linear_rate=outcome.rate.no_linear_rate,
        artifact_constants={
            "conditioning": p.conditioning,
            "mu_hstar": p.mu_hstar,
            "l1_weight": p.l1_weight,
            "lam_min": p.lam_min,
            "rank": p.rank,
            "mu_f": p.mu_f,
            "transfer": p.transfer,
            "epsilon": eps,
            "slack": config.run.slack,
            "floor": config.run.floor,
        },
    )


def cmd_run(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> List[Path]:
    """
    Run every configured algorithm on the config's problem and write one trace each

    Args:
        config: Validated experiment config
        out_dir: Output directory (default: the config's [output] path)

    Returns:
        List[Path]: The trace CSV paths, in algorithm order
    """
    out_dir = Path(out_dir or config.output.path)
    problem = build_problem(config)
    reference, outcomes = _execute_all(problem, config)

    paths = []
    for outcome in outcomes:
        meta = _metadata(config, problem, reference, outcome)
        paths.append(write_trace(out_dir, outcome.alg.value, outcome.trace, meta))
        if outcome.rate.no_linear_rate:
            logger.warning(f"{outcome.alg.label}: no linear rate for these constants")
    logger.info(f"Wrote {len(paths)} traces to {out_dir}")
    return paths


@dataclass
class VerifyRow:
    algorithm: str
    theta: float
    iters_to_eps: Optional[int]
    violations: List[int]
    per_step_violations: List[int]
    final_kkt: float
    no_linear_rate: bool

    @property
    def passed(self) -> bool:
        return not self.violations and not self.per_step_violations

    @property
    def first_violation(self) -> Optional[int]:
        found = sorted(self.violations + self.per_step_violations)
        return found[0] if found else None


@dataclass
class ReductionCheck:
    accelerated: AlgorithmId
    baseline: AlgorithmId
    max_diff: float

    @property
    def passed(self) -> bool:
        return self.max_diff <= REDUCTION_TOL

    @property
    def name(self) -> str:
        return f"{self.accelerated.label} == {self.baseline.label}"


@dataclass
class VerifySummary:
    rows: List[VerifyRow] = field(default_factory=list)
    reductions: List[ReductionCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(r.passed for r in self.reductions)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    @property
    def first_failure(self) -> Optional[Tuple[str, Optional[int]]]:
        for row in self.rows:
            if not row.passed:
                return row.algorithm, row.first_violation
        for red in self.reductions:
            if not red.passed:
                return red.name, None
        return None

    def table(self) -> str:
        lines = [f"{'algorithm':<10} {'theta':>10} {'iters-to-eps':>12} {'violations':>10} {'final-kkt':>11}  status"]
        for r in self.rows:
            theta = "n/a" if r.no_linear_rate else f"{r.theta:.6f}"
            iters = "-" if r.iters_to_eps is None else str(r.iters_to_eps)
            n_viol = len(r.violations) + len(r.per_step_violations)
            lines.append(f"{r.algorithm:<10} {theta:>10} {iters:>12} {n_viol:>10} {r.final_kkt:>11.3e}  "
                         f"{'ok' if r.passed else 'FAIL'}")
        for red in self.reductions:
            lines.append(f"{red.name:<34} max diff {red.max_diff:.3e}  {'ok' if red.passed else 'FAIL'}")
        return "\n".join(lines)

    def as_dict(self) -> Dict[str, Any]:
        failure = self.first_failure
        return {
            "passed": self.passed,
            "exit_code": self.exit_code,
            "first_failure": None if failure is None else {"check": failure[0], "k": failure[1]},
            "rows": [
                {
                    "algorithm": r.algorithm,
                    "theta": r.theta,
                    "iters_to_eps": r.iters_to_eps,
                    "violations": r.violations,
                    "per_step_violations": r.per_step_violations,
                    "final_kkt": r.final_kkt,
                    "no_linear_rate": r.no_linear_rate,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
            "reductions": [{"check": r.name, "max_diff": r.max_diff, "passed": r.passed} for r in self.reductions],
        }


def reduction_gap(problem: CompositeProblem, accelerated: AlgorithmId, baseline: AlgorithmId,
                  stepsizes: StepSizes, iters: int = REDUCTION_ITERS) -> float:
    """Largest coordinate gap between an accelerated method run with eta_z = 1, z0 = x0 and its baseline"""
    x0 = np.linspace(-1.0, 1.0, problem.d_x)
    steps = stepsizes.with_values(eta_z=1.0)
    a = init(problem, accelerated, x0)
    b = init(problem, baseline, x0)
    gap = 0.0
    for _ in range(iters):
        a = step(problem, accelerated, steps, a)
        b = step(problem, baseline, steps, b)
        gap = max(gap, float(np.max(np.abs(a.x - b.x))))
        if a.y is not None:
            gap = max(gap, float(np.max(np.abs(a.y - b.y))))
    return gap


def reduction_suite(config: ExperimentConfig) -> List[ReductionCheck]:
    """APGD == PGD, ACV-I == CV-I and ACV-II == CV-II on instances seeded like the config"""
    p = config.problem
    two = generate_problem(Regime.TWO_FUNCTION, p.d_x, p.d_y, p.seed, p.conditioning, mu_g=max(p.mu_g, 1.0))
    if p.regime is Regime.TWO_FUNCTION:
        pd = generate_problem(Regime.SMOOTH_H, p.d_x, p.d_y, p.seed, p.conditioning)
    else:
        pd = build_problem(config)

    checks = []
    for acc, base in REDUCTIONS:
        problem = pd if acc.is_primal_dual else two
        steps = stepsizes_classical(base, problem.L_f, problem.K_norm)
        checks.append(ReductionCheck(acc, base, reduction_gap(problem, acc, base, steps)))
    return checks


def cmd_verify(config: ExperimentConfig) -> VerifySummary:
    """
    Run every configured algorithm and check its trace against the contraction envelope
    (and the per-step form in the nonsmooth and constrained regimes), plus the reduction suite

    Returns:
        VerifySummary: exit_code 0 when every check passes, 1 otherwise
    """
    regime = config.problem.regime
    problem = build_problem(config)
    _, outcomes = _execute_all(problem, config)
    per_step = regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT)
    slack, floor, eps = config.run.slack, config.run.floor, config.run.epsilon

    summary = VerifySummary()
    for o in outcomes:
        report = verify_contraction(o.trace, o.rate, slack=slack, floor=floor)
        step_report = verify_per_step(o.trace, o.rate, slack=slack, floor=floor) if per_step else None
        row = VerifyRow(
            algorithm=o.alg.label,
            theta=o.rate.theta,
            iters_to_eps=o.iters_to_eps(eps),
            violations=report.violations,
            per_step_violations=step_report.violations if step_report else [],
            final_kkt=o.trace[-1].kkt,
            no_linear_rate=o.rate.no_linear_rate,
        )
        if not row.passed:
            logger.warning(f"{row.algorithm} left the contraction envelope at k={row.first_violation}")
        summary.rows.append(row)

    summary.reductions = reduction_suite(config)
    for red in summary.reductions:
        if not red.passed:
            logger.warning(f"Reduction {red.name} off by {red.max_diff:.3e}")
    logger.info(f"Verification {'passed' if summary.passed else 'failed'} for {len(summary.rows)} algorithms")
    return summary


def _dash(value: Optional[int]) -> str:
    return "-" if value is None else str(value)


@dataclass
class RateRow:
    value: float
    algorithm: str
    theta: float
    predicted: Optional[int]
    exact: Optional[int]
    trend: Optional[float]
    empirical: Optional[int]


@dataclass
class RatesReport:
    parameter: str
    rows: List[RateRow] = field(default_factory=list)

    @property
    def trend_ok(self) -> bool:
        """Empirical growth across the sweep stays within TREND_FACTOR times the predicted growth"""
        for alg in dict.fromkeys(r.algorithm for r in self.rows):
            series = [r for r in self.rows if r.algorithm == alg]
            base = series[0]
            if base.empirical is None or not base.trend:
                return False
            for r in series[1:]:
                if r.empirical is None or r.trend is None:
                    return False
                if r.empirical / max(base.empirical, 1) > TREND_FACTOR * r.trend / base.trend:
                    return False
        return True

    def table(self) -> str:
        lines = [f"{self.parameter:>12} {'algorithm':<10} {'theta':>10} {'predicted':>10} "
                 f"{'exact':>8} {'trend':>10} {'empirical':>10}"]
        for r in self.rows:
            trend = "-" if r.trend is None else f"{r.trend:.2f}"
            lines.append(f"{r.value:>12g} {r.algorithm:<10} {r.theta:>10.6f} {_dash(r.predicted):>10} "
                         f"{_dash(r.exact):>8} {trend:>10} {_dash(r.empirical):>10}")
        lines.append(f"trend_ok = {self.trend_ok}")
        return "\n".join(lines)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([self.parameter, "algorithm", "theta", "predicted", "exact", "trend", "empirical"])
            for r in self.rows:
                writer.writerow([repr(r.value), r.algorithm, repr(r.theta), r.predicted, r.exact,
                                 "" if r.trend is None else repr(r.trend), r.empirical])
        return path

    def as_dict(self) -> Dict[str, Any]:
        return {
            "parameter": self.parameter,
            "trend_ok": self.trend_ok,
            "rows": [r.__dict__ for r in self.rows],
        }


def cmd_rates(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> RatesReport:
    """
    Sweep conditioning (or lam_min in the nonsmooth and constrained regimes) and compare
    measured iterations-to-eps with the predicted bound and the complexity trend

    Returns:
        RatesReport: Rows per (value, algorithm); also written to rates.csv in out_dir
    """
    regime = config.problem.regime
    if regime in (Regime.NONSMOOTH_H, Regime.LINEAR_CONSTRAINT):
        parameter, values = "lam_min", config.sweep.lam_min or list(DEFAULT_LAM_MIN_SWEEP)
    else:
        parameter, values = "conditioning", config.sweep.conditioning or list(DEFAULT_CONDITIONING_SWEEP)
    eps = config.run.epsilon

    report = RatesReport(parameter=parameter)
    for value in values:
        problem = build_problem(config, **{parameter: value})
        _, outcomes = _execute_all(problem, config, value_tol=eps)
        trend = complexity_trend(problem, regime, eps)
        for o in outcomes:
            report.rows.append(RateRow(
                value=float(value),
                algorithm=o.alg.label,
                theta=o.rate.theta,
                predicted=iterations_bound(o.rate, eps),
                exact=iterations_exact(o.rate, eps),
                trend=trend,
                empirical=o.iters_to_eps(eps),
            ))
        logger.info(f"Rates sweep {parameter}={value} done")

    out_dir = Path(out_dir or config.output.path)
    report.to_csv(out_dir / "rates.csv")
    return report


def cmd_spectra(matrix_file: Union[str, Path]) -> SpectralSummary:
    K = load_matrix(matrix_file)
    summary = spectral_summary(K)
    logger.info(f"Spectral summary of {K.rows}x{K.cols} operator from {matrix_file}")
    return summary
