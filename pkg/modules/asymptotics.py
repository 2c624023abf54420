"""
Asymptotics Module
Closed-form weight functions of the RMST and log-rank tests under exponential
survival and uniform-recruitment administrative censoring
"""

import math
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.stats import norm

from modules.scenarios import Scenario, hazard_rates

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 301


@dataclass(frozen=True)
class ExponentialSurvival:
    """Control-arm survival S_0(t) = exp(-rate * t)"""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def survival(self, t):
        return np.exp(-self.rate * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class CensoringModel:
    """Uniform recruitment over [0, t_R] with administrative cutoff t_H"""

    t_R: float
    t_H: float

    def __post_init__(self):
        if not 0 <= self.t_R <= self.t_H or not self.t_H > 0:
            raise ValueError(f"require 0 <= t_R <= t_H and t_H > 0, got t_R={self.t_R}, t_H={self.t_H}")

    def survival(self, t):
        return censoring_survival(self, t)


@dataclass(frozen=True)
class WeightCurve:
    """A weight function on a grid; values standardized, raw_values as evaluated"""

    kind: str
    grid: np.ndarray
    values: np.ndarray
    raw_values: np.ndarray

    def mean(self) -> float:
        return trapezoidal_mean(self.grid, self.values)


def _scalar_or_array(out: np.ndarray):
    return float(out) if np.ndim(out) == 0 else out


def trapezoidal_mean(grid: np.ndarray, values: np.ndarray) -> float:
    return float(trapezoid(values, grid) / (grid[-1] - grid[0]))


def censoring_survival(model: CensoringModel, t):
    """
    Probability of still being under follow-up at study time t

    Args:
        model: recruitment duration and calendar cutoff
        t: study time(s), nonnegative

    Returns:
        1 up to t_H - t_R, then (t_H - t) / t_R, and 0 from t_H on;
        with instant recruitment, 1 before t_H and 0 from t_H
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    if model.t_R == 0:
        out = np.where(t < model.t_H, 1.0, 0.0)
    else:
        out = np.clip((model.t_H - t) / model.t_R, 0.0, 1.0)
    return _scalar_or_array(out)


def weight_rmst(s0: ExponentialSurvival, tau: float, t):
    """
    RMST weight w_D(t) = int_t^tau S_0 / int_0^tau S_0 in closed form

    Does not depend on the censoring distribution.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > tau):
        raise ValueError(f"t must lie in [0, tau={tau}]")
    lam = s0.rate
    out = (np.exp(-lam * t) - math.exp(-lam * tau)) / (1.0 - math.exp(-lam * tau))
    return _scalar_or_array(out)


def weight_ph(s0: ExponentialSurvival, cens: CensoringModel, t):
    """Log-rank weight w_theta(t) = S_C(t) * S_0(t)"""
    return _scalar_or_array(np.asarray(censoring_survival(cens, t)) * s0.survival(t))


def scenario_models(scenario: Scenario, cutoff: Optional[float] = None) -> Tuple[ExponentialSurvival, CensoringModel]:
    """Control survival and censoring model implied by a scenario (cutoff defaults to t_H)"""
    lambda0, _ = hazard_rates(scenario)
    cutoff = scenario.t_H if cutoff is None else cutoff
    return ExponentialSurvival(lambda0), CensoringModel(scenario.t_R, cutoff)


def standardized_curves(scenario: Scenario,
                        grid_size: int = DEFAULT_GRID_SIZE) -> Tuple[WeightCurve, WeightCurve]:
    """
    Both weight functions on a uniform grid over [0, tau], each scaled to trapezoidal mean 1

    Args:
        scenario: supplies control hazard, tau, t_R and t_H
        grid_size: number of grid points, at least 2

    Returns:
        Tuple of (w_D curve, w_theta curve)
    """
    if grid_size < 2:
        raise ValueError(f"grid_size must be at least 2, got {grid_size}")
    s0, cens = scenario_models(scenario)
    grid = np.linspace(0.0, scenario.tau, grid_size)

    curves = []
    for kind, raw in (("w_D", weight_rmst(s0, scenario.tau, grid)),
                      ("w_theta", weight_ph(s0, cens, grid))):
        raw = np.asarray(raw, dtype=float)
        curves.append(WeightCurve(kind, grid, raw / trapezoidal_mean(grid, raw), raw))
    return curves[0], curves[1]


def max_standardized_gap(scenario: Scenario, grid_size: int = DEFAULT_GRID_SIZE) -> float:
    """Largest pointwise distance between the two standardized weight curves"""
    w_d, w_theta = standardized_curves(scenario, grid_size)
    return float(np.max(np.abs(w_d.values - w_theta.values)))


def weight_table(scenarios: Iterable[Scenario], grid_size: int = DEFAULT_GRID_SIZE) -> pd.DataFrame:
    """
    Long-format weight-function data for every scenario

    Returns:
        DataFrame with columns scenario, t, S_C, w_D, w_theta, w_D_std, w_theta_std
    """
    frames = []
    for scenario in scenarios:
        w_d, w_theta = standardized_curves(scenario, grid_size)
        _, cens = scenario_models(scenario)
        frames.append(pd.DataFrame({
            "scenario": scenario.id,
            "t": w_d.grid,
            "S_C": censoring_survival(cens, w_d.grid),
            "w_D": w_d.raw_values,
            "w_theta": w_theta.raw_values,
            "w_D_std": w_d.values,
            "w_theta_std": w_theta.values,
        }))
        logger.info(f"Weight curves for scenario {scenario.label}: "
                    f"max standardized gap {np.max(np.abs(w_d.values - w_theta.values)):.3f}")
    return pd.concat(frames, ignore_index=True)


def expected_event_probability(rate: float, cens: CensoringModel) -> float:
    """
    P(event observed by the cutoff) for exponential events and uniform recruitment

    Equals 1 - E[exp(-rate * (t_H - R))] with R ~ Uniform(0, t_R).
    """
    if cens.t_R == 0:
        return 1.0 - math.exp(-rate * cens.t_H)
    x = rate * cens.t_R
    return 1.0 - math.exp(-rate * cens.t_H) * math.expm1(x) / x


def expected_events(scenario: Scenario, cutoff: Optional[float] = None) -> float:
    """Expected total number of events over both arms at the given calendar cutoff"""
    lambda0, lambda1 = hazard_rates(scenario)
    _, cens = scenario_models(scenario, cutoff)
    return scenario.n_per_arm * (expected_event_probability(lambda0, cens)
                                 + expected_event_probability(lambda1, cens))


def schoenfeld_power(scenario: Scenario, cutoff: Optional[float] = None, alpha: float = 0.05) -> float:
    """
    Approximate log-rank power, Phi(sqrt(d / 4) * |ln hr| - z_(1 - alpha/2))

    Args:
        scenario: design supplying hr and the expected event count
        cutoff: calendar cutoff (t_H by default)
        alpha: two-sided significance level
    """
    d = expected_events(scenario, cutoff)
    z = math.sqrt(d / 4.0) * abs(math.log(scenario.hr)) - norm.ppf(1 - alpha / 2)
    return float(norm.cdf(z))
