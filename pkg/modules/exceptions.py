"""
Error types shared by the estimation, testing and simulation modules
"""

from typing import Optional


class SurvivalAnalysisError(ValueError):
    """Base class for every analysis failure raised by this package"""


class EmptyArmError(SurvivalAnalysisError):
    def __init__(self, message: str = "empty arm"):
        super().__init__(message)


class TauBeyondDataError(SurvivalAnalysisError):
    def __init__(self, tau: float, max_time: float):
        super().__init__(f"tau beyond data: tau={tau} exceeds maximum follow-up {max_time}")
        self.tau = tau
        self.max_time = max_time


class VarianceUndefinedError(SurvivalAnalysisError):
    def __init__(self, time: float):
        super().__init__(f"variance undefined at exhausted risk set (t={time})")
        self.time = time


class DegenerateStatisticError(SurvivalAnalysisError):
    """Zero variance, zero standard error or no events"""


class ConvergenceError(SurvivalAnalysisError):
    def __init__(self, last_theta: float, iterations: int):
        super().__init__(
            f"Newton iteration did not converge after {iterations} iterations "
            f"(last theta={last_theta})"
        )
        self.last_theta = last_theta
        self.iterations = iterations


class DivergentEstimateError(SurvivalAnalysisError):
    def __init__(self, detail: str = ""):
        message = "divergent estimate"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class PowerBoundaryError(SurvivalAnalysisError):
    def __init__(self, power: float):
        super().__init__(f"power on boundary: {power}")
        self.power = power


class DataFormatError(SurvivalAnalysisError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ScenarioConfigError(SurvivalAnalysisError):
    """Invalid scenario configuration"""


class SimulationAbortedError(SurvivalAnalysisError):
    def __init__(self, scenario_id: int, n_failed: int, n_reps: int, first_error: str):
        super().__init__(
            f"scenario {scenario_id} aborted: {n_failed}/{n_reps} replicates failed "
            f"(first error: {first_error})"
        )
        self.scenario_id = scenario_id
        self.n_failed = n_failed
        self.n_reps = n_reps
        self.first_error = first_error
