"""
SurvEff command line
Subcommands: simulate, weights, analyze, scores
"""

import sys
import logging
import argparse
from typing import List, Optional

import pandas as pd

from modules.asymptotics import DEFAULT_GRID_SIZE, weight_table
from modules.case_study import DEFAULT_TOLERANCE, CaseStudyConfig, analyze_case
from modules.config import Settings, configure_logging
from modules.data_ingestion import load_csv
from modules.scenarios import load_scenarios, select_scenario
from modules.scores import patient_scores, score_summary, scores_frame, summary_frame
from modules.simulation import results_frame, run_scenarios

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger("surveff")


def emit(df: pd.DataFrame, out: Optional[str]) -> None:
    """Write a table as CSV to a file, or to stdout when out is None or '-'"""
    if out is None or out == "-":
        df.to_csv(sys.stdout, index=False, lineterminator="\n")
    else:
        df.to_csv(out, index=False, lineterminator="\n")
        logger.info(f"Wrote {len(df)} rows to {out}")


def cmd_simulate(args: argparse.Namespace) -> int:
    scenarios = load_scenarios(args.config)
    if args.scenario is not None:
        scenarios = [select_scenario(scenarios, args.scenario)]
    if args.truncate_logrank_at_tau:
        scenarios = [s.with_overrides(truncate_logrank_at_tau=True) for s in scenarios]
    results = run_scenarios(scenarios, n_reps=args.reps, seed=args.seed, n_jobs=args.n_jobs)
    emit(results_frame(results), args.out)
    return 0


def cmd_weights(args: argparse.Namespace) -> int:
    scenarios = load_scenarios(args.config)
    if args.scenario is not None:
        scenarios = [select_scenario(scenarios, args.scenario)]
    emit(weight_table(scenarios, grid_size=args.grid), args.out)
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    expected = None
    if args.expect_cox is not None or args.expect_rmst is not None:
        expected = (args.expect_cox, args.expect_rmst)
    config = CaseStudyConfig(
        path=args.data,
        tau=args.tau,
        time_unit=args.time_unit,
        expected_z=expected,
        tolerance=args.tolerance,
        label=args.label,
    )
    report = analyze_case(config)
    emit(pd.DataFrame([report.to_row()]), args.out)
    if expected is not None and report.check_expected(expected, args.tolerance):
        logger.error(f"{config.name}: Z statistics outside tolerance {args.tolerance}")
        return 1
    return 0


def cmd_scores(args: argparse.Namespace) -> int:
    dataset = load_csv(args.data)
    records = patient_scores(dataset, args.tau)
    emit(scores_frame(records), args.out)
    if args.summary_out:
        emit(summary_frame(score_summary(records)), args.summary_out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surveff",
        description="Compare the RMST-difference test with log-rank/Cox analyses of two-arm survival data",
    )
    parser.add_argument("--log-level", default=None,
                        help="Logging level (default: SURVEFF_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo power and relative efficiency per scenario")
    p.add_argument("--config", default=None, help="Scenario JSON file (default: bundled twelve scenarios)")
    p.add_argument("--scenario", type=int, default=None, help="Run only this scenario id")
    p.add_argument("--reps", type=int, default=None, help="Replicates per scenario")
    p.add_argument("--seed", type=int, default=None, help="Master seed for every scenario")
    p.add_argument("--n-jobs", type=int, default=None, help="Parallel workers (-1 for all cores)")
    p.add_argument("--truncate-logrank-at-tau", action="store_true",
                   help="Censor the main log-rank analysis at the effective tau")
    p.add_argument("--out", default=None, help="Output CSV (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("weights", help="Weight functions of both tests on a grid over [0, tau]")
    p.add_argument("--config", default=None, help="Scenario JSON file (default: bundled twelve scenarios)")
    p.add_argument("--scenario", type=int, default=None, help="Only this scenario id")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE, help="Grid points per scenario")
    p.add_argument("--out", default=None, help="Output CSV (default: stdout)")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("analyze", help="Cox, log-rank and RMST tests on a patient-level CSV")
    p.add_argument("--data", required=True, help="CSV with header time,event,arm")
    p.add_argument("--tau", type=float, required=True, help="RMST restriction time, in the file's unit")
    p.add_argument("--time-unit", default="", help="Label for the time unit (e.g. months)")
    p.add_argument("--label", default="", help="Trial name for the report row")
    p.add_argument("--expect-cox", type=float, default=None, help="Reference Cox Z")
    p.add_argument("--expect-rmst", type=float, default=None, help="Reference RMST Z")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE,
                   help="Accepted absolute Z difference")
    p.add_argument("--out", default=None, help="Output CSV (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("scores", help="Per-patient log-rank and RMST scores")
    p.add_argument("--data", required=True, help="CSV with header time,event,arm")
    p.add_argument("--tau", type=float, required=True, help="RMST restriction time")
    p.add_argument("--out", default=None, help="Output CSV (default: stdout)")
    p.add_argument("--summary-out", default=None, help="Per-arm mean scores CSV")
    p.set_defaults(func=cmd_scores)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns the process exit code"""
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level or Settings.from_env().log_level)
        return args.func(args)
    except (ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
