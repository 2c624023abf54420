"""
RMST Module
Restricted mean survival time estimation and the two-sample RMST-difference test
"""

import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.stats import norm

from modules.exceptions import (
    DegenerateStatisticError,
    TauBeyondDataError,
    VarianceUndefinedError,
)
from modules.survival_core import (
    ARMS,
    ArmInput,
    TrialDataset,
    as_arm_arrays,
    event_table,
    km_estimate,
    restricted_integral,
)

ALPHA = 0.05
Z_CRITICAL = float(norm.ppf(1 - ALPHA / 2))


@dataclass(frozen=True)
class RmstEstimate:
    """Restricted mean up to tau, with its plug-in variance"""

    mu: float
    variance: float
    tau: float

    @property
    def std_err(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class TestResult:
    """
    Standardized two-sample test statistic

    estimate is the statistic's numerator on its natural scale (the RMST
    difference, O - E, or a log hazard ratio) and std_err its standard error.
    """

    z: float
    p_two_sided: float
    estimate: float
    std_err: float
    method: str = ""

    __test__ = False  # keeps pytest from collecting this class

    @classmethod
    def from_estimate(cls, estimate: float, std_err: float, method: str = "") -> "TestResult":
        z = estimate / std_err
        return cls(z, two_sided_p(z), estimate, std_err, method)

    def rejects(self, critical: float = Z_CRITICAL) -> bool:
        return abs(self.z) > critical

    def confidence_interval(self, level: float = 0.95) -> Tuple[float, float]:
        """Wald interval estimate +/- z * std_err"""
        if not 0 < level < 1:
            raise ValueError(f"confidence level must be in (0, 1), got {level}")
        half_width = float(norm.ppf((1 + level) / 2)) * self.std_err
        return self.estimate - half_width, self.estimate + half_width


def two_sided_p(z: float) -> float:
    return float(2.0 * norm.sf(abs(z)))


def rmst_estimate(arm_data: ArmInput, tau: float) -> RmstEstimate:
    """
    RMST of one arm from its Kaplan-Meier curve

    Args:
        arm_data: one arm's (time, event) observations
        tau: restriction time, at most the arm's maximum follow-up

    Returns:
        RmstEstimate with mu = area under KM on [0, tau] and the
        Greenwood-type variance sum of A(t_i)^2 d_i / (n_i (n_i - d_i)),
        where A(t) is the KM area over [t, tau]
    """
    data = as_arm_arrays(arm_data)
    if not (math.isfinite(tau) and tau > 0):
        raise ValueError(f"tau must be positive, got {tau}")
    max_time = float(data.time.max())
    if tau > max_time:
        raise TauBeyondDataError(tau, max_time)

    km = km_estimate(data)
    mu = restricted_integral(km, 0.0, tau)

    # Tail areas A(t) at each KM breakpoint before tau; A(tau) is exactly 0
    before = km.breakpoints[km.breakpoints < tau]
    knots = np.concatenate(([0.0], before, [tau]))
    areas = km.levels[: before.size + 1] * np.diff(knots)
    tail = np.concatenate((np.cumsum(areas[::-1])[::-1], [0.0]))

    table = event_table(data.time, data.event)
    use = (table.n_events > 0) & (table.times <= tau)
    t_i = table.times[use]
    d = table.n_events[use].astype(float)
    n = table.n_at_risk[use].astype(float)
    # event times < tau are exactly the breakpoints in `before`, in order
    a = np.where(t_i < tau, tail[1:1 + t_i.size], 0.0)

    exhausted = n == d
    if np.any(exhausted & (a > 0)):
        raise VarianceUndefinedError(float(t_i[exhausted & (a > 0)][0]))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(exhausted, 0.0, a * a * d / (n * (n - d)))
    return RmstEstimate(mu=mu, variance=float(np.sum(terms)), tau=float(tau))


def rmst_by_arm(dataset: TrialDataset, tau: float) -> Dict[int, RmstEstimate]:
    dataset.require_both_arms()
    return {arm: rmst_estimate(dataset.arm_data(arm), tau) for arm in ARMS}


def rmst_diff_test(dataset: TrialDataset, tau: float) -> TestResult:
    """
    Two-sample RMST-difference test with a normal reference

    Args:
        dataset: two-arm trial data
        tau: restriction time valid for both arms

    Returns:
        TestResult with estimate = mu_1 - mu_0 and std_err = sqrt(var_1 + var_0)
    """
    by_arm = rmst_by_arm(dataset, tau)
    estimate = by_arm[1].mu - by_arm[0].mu
    std_err = math.sqrt(by_arm[1].variance + by_arm[0].variance)
    if std_err == 0:
        raise DegenerateStatisticError("degenerate variance: RMST difference has zero standard error")
    return TestResult.from_estimate(estimate, std_err, method="rmst_difference")
