"""
Simulation Module
Monte Carlo comparison of the RMST-difference and log-rank tests over trial scenarios
"""

import math
import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.stats import norm

from modules.asymptotics import schoenfeld_power
from modules.config import Settings
from modules.exceptions import PowerBoundaryError, SimulationAbortedError, SurvivalAnalysisError
from modules.ph_tests import logrank_test
from modules.rmst import Z_CRITICAL, rmst_diff_test
from modules.scenarios import Scenario, hazard_rates
from modules.survival_core import ARMS, TrialDataset

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MAX_FAILURE_RATE = 0.001

__all__ = [
    "RandomSource",
    "Scenario",
    "ScenarioResult",
    "effective_tau",
    "hazard_rates",
    "relative_efficiency",
    "results_frame",
    "run_scenario",
    "run_scenarios",
    "simulate_trial",
]


@dataclass(frozen=True)
class RandomSource:
    """
    One independent random stream per replicate

    The generator is derived from SeedSequence(seed, spawn_key=(stream_id,)),
    so a replicate depends only on (seed, stream_id) and never on which
    worker runs it or in what order.
    """

    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,)))


@dataclass(frozen=True)
class ScenarioResult:
    """Aggregated Monte Carlo results for one scenario"""

    scenario_id: int
    event_rate: str
    recruitment: str
    power_rmst: float
    power_ph: float
    power_rmst_plus: float
    power_ph_plus: float
    re: float
    re_plus: float
    tau_bar: float
    pct_events_after_tau: float
    n_reps: int
    n_failed: int
    seed: int
    analytic_power_ph: float
    analytic_power_ph_plus: float

    @property
    def n_successful(self) -> int:
        return self.n_reps - self.n_failed

    def mc_se(self, power: float) -> float:
        """Monte Carlo standard error sqrt(p (1 - p) / reps) of an estimated power"""
        return math.sqrt(power * (1 - power) / self.n_successful)

    def to_row(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario_id,
            "event_rate": self.event_rate,
            "recruitment": self.recruitment,
            "power_rmst": self.power_rmst,
            "se_rmst": self.mc_se(self.power_rmst),
            "power_ph": self.power_ph,
            "se_ph": self.mc_se(self.power_ph),
            "re": self.re,
            "tau_bar": self.tau_bar,
            "power_rmst_plus": self.power_rmst_plus,
            "se_rmst_plus": self.mc_se(self.power_rmst_plus),
            "power_ph_plus": self.power_ph_plus,
            "se_ph_plus": self.mc_se(self.power_ph_plus),
            "re_plus": self.re_plus,
            "pct_events_after_tau": self.pct_events_after_tau,
            "analytic_power_ph": self.analytic_power_ph,
            "analytic_power_ph_plus": self.analytic_power_ph_plus,
            "n_reps": self.n_reps,
            "n_failed": self.n_failed,
            "seed": self.seed,
        }


def simulate_trial(scenario: Scenario, rng: Union[RandomSource, np.random.Generator],
                   cutoff: float) -> TrialDataset:
    """
    Simulate one trial administratively censored at a calendar cutoff

    Args:
        scenario: design parameters
        rng: replicate stream (or an already constructed generator)
        cutoff: t_H or t_H_plus of the scenario

    Returns:
        TrialDataset with n_per_arm subjects per arm; entry holds recruitment times
    """
    if cutoff not in (scenario.t_H, scenario.t_H_plus):
        raise ValueError(f"cutoff must be t_H={scenario.t_H} or t_H_plus={scenario.t_H_plus}, got {cutoff}")
    gen = rng.generator() if isinstance(rng, RandomSource) else rng
    rates = dict(zip(ARMS, hazard_rates(scenario)))
    n = scenario.n_per_arm

    times, events, arms, entries = [], [], [], []
    for arm in ARMS:
        entry = gen.uniform(0.0, scenario.t_R, n) if scenario.t_R > 0 else np.zeros(n)
        latent = gen.exponential(1.0 / rates[arm], n)
        potential = cutoff - entry
        times.append(np.minimum(latent, potential))
        events.append(latent <= potential)
        arms.append(np.full(n, arm, dtype=np.int8))
        entries.append(entry)
    return TrialDataset(
        np.concatenate(times), np.concatenate(events), np.concatenate(arms),
        cutoff, np.concatenate(entries),
    )


def effective_tau(dataset: TrialDataset, tau_target: float) -> float:
    """
    Restriction time usable on this dataset

    Returns tau_target when every arm still has someone followed to
    tau_target, otherwise the smallest per-arm maximum follow-up time.
    """
    dataset.require_both_arms()
    max_by_arm = [float(dataset.arm_data(arm).time.max()) for arm in ARMS]
    if all(m >= tau_target for m in max_by_arm):
        return float(tau_target)
    return min(max_by_arm)


def relative_efficiency(power_rmst: float, power_ph: float) -> float:
    """
    Approximate sample-size ratio for equal power

    ((z_0.975 + Phi^-1(power_rmst)) / (z_0.975 + Phi^-1(power_ph)))^2; values
    below 1 mean the PH analysis needs fewer patients.
    """
    for power in (power_rmst, power_ph):
        if not 0 < power < 1:
            raise PowerBoundaryError(power)
    ratio = (Z_CRITICAL + norm.ppf(power_rmst)) / (Z_CRITICAL + norm.ppf(power_ph))
    return float(ratio ** 2)


def _analyze_replicate(scenario: Scenario, seed: int, stream_id: int) -> tuple:
    plus = simulate_trial(scenario, RandomSource(seed, stream_id), scenario.t_H_plus)
    main = plus.recensor(scenario.t_H)
    tau_eff = effective_tau(main, scenario.tau)

    rmst = rmst_diff_test(main, tau_eff)
    rmst_plus = rmst_diff_test(plus, effective_tau(plus, scenario.tau))
    logrank_data = main.truncate(tau_eff) if scenario.truncate_logrank_at_tau else main
    ph = logrank_test(logrank_data)
    ph_plus = logrank_test(plus)

    n_events = plus.event_count()
    pct_after = 100.0 * plus.events_after(tau_eff) / n_events if n_events else math.nan
    return rmst.rejects(), ph.rejects(), rmst_plus.rejects(), ph_plus.rejects(), tau_eff, pct_after


def _run_chunk(scenario: Scenario, seed: int, start: int, stop: int) -> Dict[str, Any]:
    outcomes = []
    failures = []
    for stream_id in range(start, stop):
        try:
            outcomes.append(_analyze_replicate(scenario, seed, stream_id))
        except SurvivalAnalysisError as e:
            failures.append((stream_id, str(e)))
    columns = list(zip(*outcomes)) if outcomes else [()] * 6
    return {
        "reject_rmst": np.array(columns[0], dtype=bool),
        "reject_ph": np.array(columns[1], dtype=bool),
        "reject_rmst_plus": np.array(columns[2], dtype=bool),
        "reject_ph_plus": np.array(columns[3], dtype=bool),
        "tau": np.array(columns[4], dtype=float),
        "pct_after": np.array(columns[5], dtype=float),
        "failures": failures,
    }


def _safe_relative_efficiency(power_rmst: float, power_ph: float, label: str) -> float:
    try:
        return relative_efficiency(power_rmst, power_ph)
    except PowerBoundaryError as e:
        logger.warning(f"Relative efficiency undefined for {label}: {e}")
        return math.nan


def run_scenario(scenario: Scenario, n_reps: Optional[int] = None, seed: Optional[int] = None,
                 n_jobs: Optional[int] = None, chunk_size: Optional[int] = None) -> ScenarioResult:
    """
    Simulate and analyze n_reps trials for one scenario

    Each replicate is drawn once at t_H_plus and re-censored at t_H so both
    analyses share latent data. The RMST test runs on the t_H data at the
    replicate's effective tau; the log-rank test runs on the t_H data and on
    the t_H_plus data. The RMST+ column keeps the target tau but tests the
    t_H_plus data, where late recruits are followed further before tau.

    Args:
        scenario: design to simulate
        n_reps: replicates (scenario.n_reps, then SURVEFF_REPS, when None)
        seed: master seed (scenario.seed, then SURVEFF_SEED, when None)
        n_jobs: joblib workers (SURVEFF_N_JOBS when None)
        chunk_size: replicates per parallel task

    Returns:
        ScenarioResult; identical inputs give identical results for any n_jobs
    """
    settings = Settings.from_env()
    n_reps = n_reps if n_reps is not None else (scenario.n_reps or settings.n_reps)
    seed = seed if seed is not None else (scenario.seed if scenario.seed is not None else settings.seed)
    n_jobs = n_jobs if n_jobs is not None else settings.n_jobs
    chunk_size = chunk_size or settings.chunk_size
    if n_reps < 1:
        raise ValueError(f"n_reps must be at least 1, got {n_reps}")

    logger.info(f"Running scenario {scenario.label}: {n_reps} replicates, seed {seed}, n_jobs {n_jobs}")
    bounds = [(start, min(start + chunk_size, n_reps)) for start in range(0, n_reps, chunk_size)]
    chunks = Parallel(n_jobs=n_jobs)(
        delayed(_run_chunk)(scenario, seed, start, stop) for start, stop in bounds
    )

    failures = [f for chunk in chunks for f in chunk["failures"]]
    n_failed = len(failures)
    if n_failed > MAX_FAILURE_RATE * n_reps:
        raise SimulationAbortedError(scenario.id, n_failed, n_reps,
                                     f"replicate {failures[0][0]}: {failures[0][1]}")
    if failures:
        logger.warning(f"Scenario {scenario.id}: {n_failed} replicate(s) failed and were excluded "
                       f"(first: replicate {failures[0][0]}: {failures[0][1]})")

    def stacked(key: str) -> np.ndarray:
        return np.concatenate([chunk[key] for chunk in chunks])

    power_rmst = float(np.mean(stacked("reject_rmst")))
    power_ph = float(np.mean(stacked("reject_ph")))
    power_rmst_plus = float(np.mean(stacked("reject_rmst_plus")))
    power_ph_plus = float(np.mean(stacked("reject_ph_plus")))
    pct_after = stacked("pct_after")

    result = ScenarioResult(
        scenario_id=scenario.id,
        event_rate=scenario.event_rate,
        recruitment=scenario.recruitment,
        power_rmst=power_rmst,
        power_ph=power_ph,
        power_rmst_plus=power_rmst_plus,
        power_ph_plus=power_ph_plus,
        re=_safe_relative_efficiency(power_rmst, power_ph, f"scenario {scenario.id}"),
        re_plus=_safe_relative_efficiency(power_rmst_plus, power_ph_plus, f"scenario {scenario.id} (+)"),
        tau_bar=float(np.mean(stacked("tau"))),
        pct_events_after_tau=float(np.nanmean(pct_after)) if np.any(~np.isnan(pct_after)) else math.nan,
        n_reps=n_reps,
        n_failed=n_failed,
        seed=seed,
        analytic_power_ph=schoenfeld_power(scenario),
        analytic_power_ph_plus=schoenfeld_power(scenario, cutoff=scenario.t_H_plus),
    )
    logger.info(f"Scenario {scenario.id} done: RMST {result.power_rmst:.3f}, PH {result.power_ph:.3f}, "
                f"RMST+ {result.power_rmst_plus:.3f}, "
                f"PH+ {result.power_ph_plus:.3f}, RE {result.re:.2f}, tau_bar {result.tau_bar:.2f}")
    return result


def run_scenarios(scenarios: Iterable[Scenario], n_reps: Optional[int] = None, seed: Optional[int] = None,
                  n_jobs: Optional[int] = None) -> List[ScenarioResult]:
    """Run several scenarios in order; a shared seed override applies to all of them"""
    return [run_scenario(s, n_reps=n_reps, seed=seed, n_jobs=n_jobs) for s in scenarios]


def results_frame(results: Iterable[ScenarioResult]) -> pd.DataFrame:
    """Table of scenario results, one row per scenario"""
    return pd.DataFrame([r.to_row() for r in results])
