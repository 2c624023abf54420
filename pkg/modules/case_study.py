"""
Case Study Module
Applies the Cox, log-rank and RMST tests to one patient-level trial file
"""

import math
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from modules.data_ingestion import load_csv
from modules.exceptions import TauBeyondDataError
from modules.ph_tests import cox_fit, cox_score_test, logrank_test
from modules.rmst import rmst_by_arm, rmst_diff_test
from modules.survival_core import TrialDataset

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.15


@dataclass(frozen=True)
class CaseStudyConfig:
    """
    One case-study analysis

    tau is in the file's own time unit; time_unit is only a label.
    expected_z is an optional (cox_z, rmst_z) pair to check the result against.
    """

    path: Union[str, Path]
    tau: float
    time_unit: str = ""
    expected_z: Optional[Tuple[Optional[float], Optional[float]]] = None
    tolerance: float = DEFAULT_TOLERANCE
    label: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.tolerance >= 0:
            raise ValueError(f"tolerance must be nonnegative, got {self.tolerance}")

    @property
    def name(self) -> str:
        return self.label or Path(self.path).stem


@dataclass(frozen=True)
class CaseStudyReport:
    """
    Test results for one trial, with every Z oriented so positive favors arm 1

    cox_z and cox_score_z are negated log-hazard-ratio statistics, logrank_z
    is (E_1 - O_1) / sqrt(V), and rmst_z is the RMST difference arm 1 - arm 0
    over its standard error.
    """

    label: str
    n_arm0: int
    n_arm1: int
    events_arm0: int
    events_arm1: int
    hazard_ratio: float
    cox_z: float
    cox_score_z: float
    logrank_z: float
    rmst_arm0: float
    rmst_arm1: float
    rmst_diff: float
    rmst_diff_lower: float
    rmst_diff_upper: float
    rmst_z: float
    tau: float
    time_unit: str
    pct_events_after_tau: float

    def to_row(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "n_arm0": self.n_arm0,
            "n_arm1": self.n_arm1,
            "events_arm0": self.events_arm0,
            "events_arm1": self.events_arm1,
            "tau": self.tau,
            "time_unit": self.time_unit,
            "hazard_ratio": self.hazard_ratio,
            "cox_z": self.cox_z,
            "cox_score_z": self.cox_score_z,
            "logrank_z": self.logrank_z,
            "rmst_arm0": self.rmst_arm0,
            "rmst_arm1": self.rmst_arm1,
            "rmst_diff": self.rmst_diff,
            "rmst_diff_lower": self.rmst_diff_lower,
            "rmst_diff_upper": self.rmst_diff_upper,
            "rmst_z": self.rmst_z,
            "pct_events_after_tau": self.pct_events_after_tau,
        }

    def check_expected(self, expected_z: Tuple[Optional[float], Optional[float]],
                       tolerance: float = DEFAULT_TOLERANCE) -> List[str]:
        """
        Compare the Cox and RMST Z statistics with reference values

        Args:
            expected_z: (cox_z, rmst_z); either entry may be None to skip it
            tolerance: largest accepted absolute difference

        Returns:
            One message per statistic outside tolerance; empty when all match
        """
        failures = []
        for name, observed, expected in (("cox_z", self.cox_z, expected_z[0]),
                                         ("rmst_z", self.rmst_z, expected_z[1])):
            if expected is None:
                continue
            gap = abs(observed - expected)
            if gap > tolerance:
                failures.append(f"{name} = {observed:.4f} differs from expected {expected} "
                                f"by {gap:.4f} (tolerance {tolerance})")
        return failures


def analyze_dataset(dataset: TrialDataset, tau: float, time_unit: str = "",
                    label: str = "") -> CaseStudyReport:
    """
    Run the Cox fit (Wald and score), the log-rank test and the RMST test at tau

    Args:
        dataset: two-arm patient-level data
        tau: restriction time, at most the largest follow-up time
        time_unit: label carried into the report
        label: name of the trial

    Returns:
        CaseStudyReport
    """
    dataset.require_both_arms()
    if tau > dataset.cutoff:
        raise TauBeyondDataError(tau, dataset.cutoff)

    fit = cox_fit(dataset)
    score = cox_score_test(dataset)
    logrank = logrank_test(dataset)
    by_arm = rmst_by_arm(dataset, tau)
    rmst = rmst_diff_test(dataset, tau)
    lower, upper = rmst.confidence_interval()
    counts = dataset.arm_counts()
    n_events = dataset.event_count()

    report = CaseStudyReport(
        label=label,
        n_arm0=counts[0],
        n_arm1=counts[1],
        events_arm0=int(dataset.arm_data(0).event.sum()),
        events_arm1=int(dataset.arm_data(1).event.sum()),
        hazard_ratio=fit.hazard_ratio,
        cox_z=-fit.wald_z,
        cox_score_z=-score.z,
        logrank_z=-logrank.z,
        rmst_arm0=by_arm[0].mu,
        rmst_arm1=by_arm[1].mu,
        rmst_diff=rmst.estimate,
        rmst_diff_lower=lower,
        rmst_diff_upper=upper,
        rmst_z=rmst.z,
        tau=float(tau),
        time_unit=time_unit,
        pct_events_after_tau=100.0 * dataset.events_after(tau) / n_events,
    )
    logger.info(f"Case study {label or '<unnamed>'}: HR {report.hazard_ratio:.3f}, Cox Z {report.cox_z:.3f}, "
                f"RMST Z {report.rmst_z:.3f} at tau={tau} {time_unit}".rstrip())
    return report


def analyze_case(config: CaseStudyConfig) -> CaseStudyReport:
    """Load the configured file and analyze it; expectation mismatches are logged"""
    dataset = load_csv(config.path)
    report = analyze_dataset(dataset, config.tau, config.time_unit, config.name)
    if config.expected_z is not None:
        for failure in report.check_expected(config.expected_z, config.tolerance):
            logger.warning(f"{config.name}: {failure}")
    return report
