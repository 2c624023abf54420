"""
Scores Module
Per-patient score decomposition of the log-rank and RMST statistics, for score plots
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence

import numpy as np
import pandas as pd

from modules.exceptions import DegenerateStatisticError, TauBeyondDataError
from modules.survival_core import ArmData, TrialDataset, km_estimate, na_estimate

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

SCORE_KINDS = ("logrank", "rmst")


@dataclass(frozen=True)
class ScoreRecord:
    time: float
    event: bool
    arm: int
    score_logrank: float
    score_rmst: float


class ScoreSummary(NamedTuple):
    """Per-arm mean scores; diff = mean_arm0 - mean_arm1"""

    mean_arm0: float
    mean_arm1: float
    diff: float


def raw_scores(dataset: TrialDataset, tau: float) -> Dict[str, np.ndarray]:
    """
    Unstandardized martingale-residual scores from the pooled sample

    The log-rank score is event - Lambda(t) over full follow-up. The RMST
    score uses the weight w(u) = int_u^tau S / int_0^tau S with pooled KM S,
    capped at tau: event * w(min(t, tau)) - sum of w dLambda up to min(t, tau).

    Returns:
        Dict with 'logrank' and 'rmst' arrays in dataset order
    """
    if dataset.event_count() == 0:
        raise DegenerateStatisticError("no events")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    max_time = float(dataset.time.max())
    if tau > max_time:
        raise TauBeyondDataError(tau, max_time)

    pooled = ArmData(dataset.time, dataset.event)
    cumhaz = na_estimate(pooled)
    km = km_estimate(pooled)
    time = dataset.time
    event = dataset.event.astype(float)

    logrank = event - cumhaz(time)

    total_area = float(km.cumulative_integral(tau))

    def weight(u: np.ndarray) -> np.ndarray:
        capped = np.minimum(u, tau)
        w = (total_area - km.cumulative_integral(capped)) / total_area
        return np.where(u >= tau, 0.0, w)

    u = cumhaz.breakpoints
    increments = cumhaz.jumps()
    weighted = np.cumsum(weight(u) * increments)
    capped_time = np.minimum(time, tau)
    k = np.searchsorted(u, capped_time, side="right")
    integral = np.where(k > 0, weighted[np.maximum(k - 1, 0)], 0.0)
    rmst = event * weight(capped_time) - integral
    return {"logrank": logrank, "rmst": rmst}


def _standardize(values: np.ndarray, kind: str) -> np.ndarray:
    sd = values.std()
    if sd == 0:
        raise DegenerateStatisticError(f"degenerate: {kind} scores have zero variance")
    return (values - values.mean()) / sd


def patient_scores(dataset: TrialDataset, tau: float) -> List[ScoreRecord]:
    """
    Standardized per-patient scores for both tests

    Args:
        dataset: pooled two-arm data with at least one event
        tau: RMST restriction time

    Returns:
        One ScoreRecord per subject, scores scaled to mean 0 and unit variance
    """
    raw = raw_scores(dataset, tau)
    logrank = _standardize(raw["logrank"], "logrank")
    rmst = _standardize(raw["rmst"], "rmst")
    logger.info(f"Computed scores for {len(dataset)} patients at tau={tau}")
    return [
        ScoreRecord(float(t), bool(e), int(a), float(s_lr), float(s_rm))
        for t, e, a, s_lr, s_rm in zip(dataset.time, dataset.event, dataset.arm, logrank, rmst)
    ]


def score_summary(records: Sequence[ScoreRecord]) -> Dict[str, ScoreSummary]:
    """
    Mean score per arm and their difference, for each score kind

    diff = mean_arm0 - mean_arm1, so for the log-rank score its sign is the
    sign of E_1 - O_1 (positive when arm 1 has fewer events than expected).
    """
    arm = np.array([r.arm for r in records])
    if not (np.any(arm == 0) and np.any(arm == 1)):
        raise ValueError("both arms must be represented in the score records")
    summary = {}
    for kind in SCORE_KINDS:
        values = np.array([getattr(r, f"score_{kind}") for r in records])
        mean0 = float(values[arm == 0].mean())
        mean1 = float(values[arm == 1].mean())
        summary[kind] = ScoreSummary(mean0, mean1, mean0 - mean1)
    return summary


def scores_frame(records: Sequence[ScoreRecord]) -> pd.DataFrame:
    """Plot-ready table: time, event, arm, score_logrank, score_rmst"""
    return pd.DataFrame({
        "time": [r.time for r in records],
        "event": [int(r.event) for r in records],
        "arm": [r.arm for r in records],
        "score_logrank": [r.score_logrank for r in records],
        "score_rmst": [r.score_rmst for r in records],
    })


def summary_frame(summary: Dict[str, ScoreSummary]) -> pd.DataFrame:
    return pd.DataFrame([
        {"score": kind, "mean_arm0": s.mean_arm0, "mean_arm1": s.mean_arm1, "diff": s.diff}
        for kind, s in summary.items()
    ])
