"""
Scenarios Module
Trial scenario definitions and the JSON scenario-configuration loader
"""

import json
import math
import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from modules.exceptions import ScenarioConfigError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
DEFAULT_CONFIG = CONFIG_DIR / "standard_scenarios.json"

# s1_at_3 is the experimental-arm survival probability at this time (years)
REFERENCE_TIME = 3.0

REQUIRED_FIELDS = ("id", "s1_at_3", "hr", "n_per_arm", "tau", "t_H", "t_H_plus", "t_R")


@dataclass(frozen=True)
class Scenario:
    """One simulated trial design: event rates, effect, size and follow-up"""

    id: int
    s1_at_3: float
    hr: float
    n_per_arm: int
    tau: float
    t_H: float
    t_H_plus: float
    t_R: float
    event_rate: str = ""
    recruitment: str = ""
    n_reps: Optional[int] = None
    seed: Optional[int] = None
    truncate_logrank_at_tau: bool = False

    def __post_init__(self):
        problems = []
        if not 0 < self.s1_at_3 < 1:
            problems.append(f"s1_at_3 must be in (0, 1), got {self.s1_at_3}")
        if not self.hr > 0:
            problems.append(f"hr must be positive, got {self.hr}")
        if self.n_per_arm < 1:
            problems.append(f"n_per_arm must be a positive integer, got {self.n_per_arm}")
        if not 0 < self.tau <= self.t_H <= self.t_H_plus:
            problems.append(
                f"require 0 < tau <= t_H <= t_H_plus, got tau={self.tau}, "
                f"t_H={self.t_H}, t_H_plus={self.t_H_plus}"
            )
        if not 0 <= self.t_R <= self.t_H:
            problems.append(f"require 0 <= t_R <= t_H, got t_R={self.t_R}, t_H={self.t_H}")
        if self.n_reps is not None and self.n_reps < 1:
            problems.append(f"n_reps must be at least 1, got {self.n_reps}")
        if self.seed is not None and self.seed < 0:
            problems.append(f"seed must be nonnegative, got {self.seed}")
        if problems:
            raise ScenarioConfigError(f"scenario {self.id}: " + "; ".join(problems))

    @property
    def label(self) -> str:
        parts = [p for p in (self.event_rate, self.recruitment) if p]
        return f"{self.id} ({', '.join(parts)})" if parts else str(self.id)

    def with_overrides(self, **changes: Any) -> "Scenario":
        """Copy with some fields replaced, re-validated"""
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def hazard_rates(scenario: Scenario) -> Tuple[float, float]:
    """
    Exponential hazards implied by a scenario

    Returns:
        Tuple of (lambda0, lambda1) with lambda1 = -ln(s1_at_3) / 3 and
        lambda0 = lambda1 / hr
    """
    lambda1 = -math.log(scenario.s1_at_3) / REFERENCE_TIME
    return lambda1 / scenario.hr, lambda1


def _parse_scenario(raw: Any, position: int) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioConfigError(f"scenario #{position}: expected an object, got {type(raw).__name__}")
    known = {f.name for f in fields(Scenario)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ScenarioConfigError(f"scenario #{position}: unknown field(s) {unknown}")
    missing = [name for name in REQUIRED_FIELDS if name not in raw]
    if missing:
        raise ScenarioConfigError(f"scenario #{position}: missing field(s) {missing}")

    values = dict(raw)
    try:
        for name in ("id", "n_per_arm"):
            values[name] = _as_int(values[name], name)
        for name in ("s1_at_3", "hr", "tau", "t_H", "t_H_plus", "t_R"):
            values[name] = _as_float(values[name], name)
        for name in ("n_reps", "seed"):
            if values.get(name) is not None:
                values[name] = _as_int(values[name], name)
        if "truncate_logrank_at_tau" in values and not isinstance(values["truncate_logrank_at_tau"], bool):
            raise ScenarioConfigError("truncate_logrank_at_tau must be true or false")
        for name in ("event_rate", "recruitment"):
            if name in values and not isinstance(values[name], str):
                raise ScenarioConfigError(f"{name} must be a string")
    except ScenarioConfigError as e:
        raise ScenarioConfigError(f"scenario #{position}: {e}") from None
    return Scenario(**values)


def _as_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioConfigError(f"{name} must be an integer, got {value!r}")
    return value


def _as_float(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioConfigError(f"{name} must be a finite number, got {value!r}")
    return float(value)


def parse_scenarios(document: Union[Dict[str, Any], List[Any]]) -> List[Scenario]:
    """
    Validate a decoded scenario configuration

    Args:
        document: either {"scenarios": [...]} or a bare list of scenario objects

    Returns:
        List of Scenario in file order
    """
    if isinstance(document, dict):
        if "scenarios" not in document:
            raise ScenarioConfigError("configuration object must contain a 'scenarios' array")
        entries = document["scenarios"]
    else:
        entries = document
    if not isinstance(entries, list) or not entries:
        raise ScenarioConfigError("'scenarios' must be a non-empty array")

    scenarios = [_parse_scenario(raw, i + 1) for i, raw in enumerate(entries)]
    ids = [s.id for s in scenarios]
    if len(set(ids)) != len(ids):
        raise ScenarioConfigError(f"duplicate scenario ids in {ids}")
    return scenarios


def load_scenarios(path: Optional[Union[str, Path]] = None) -> List[Scenario]:
    """
    Load scenarios from a JSON configuration file

    Args:
        path: configuration file; the bundled twelve-scenario file when None

    Returns:
        List of validated Scenario objects
    """
    path = Path(path) if path is not None else DEFAULT_CONFIG
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None

    scenarios = parse_scenarios(document)
    logger.info(f"Loaded {len(scenarios)} scenarios from {path}")
    return scenarios


def select_scenario(scenarios: List[Scenario], scenario_id: int) -> Scenario:
    for scenario in scenarios:
        if scenario.id == scenario_id:
            return scenario
    raise ScenarioConfigError(f"no scenario with id {scenario_id}; available: {[s.id for s in scenarios]}")
