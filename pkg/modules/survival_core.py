"""
Survival Core Module
Data model for right-censored two-arm trials plus the Kaplan-Meier and
Nelson-Aalen estimators, kept as exact step functions
"""

import math
from dataclasses import dataclass
from typing import Dict, Iterable, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd

from modules.exceptions import EmptyArmError

ARMS = (0, 1)


@dataclass(frozen=True)
class SubjectRecord:
    """One patient: arm label, follow-up time and event indicator"""

    arm: int
    time: float
    event: bool

    def __post_init__(self):
        if self.arm not in ARMS:
            raise ValueError(f"arm must be 0 or 1, got {self.arm!r}")
        if not math.isfinite(self.time) or self.time < 0:
            raise ValueError(f"time must be finite and nonnegative, got {self.time!r}")


class ArmData(NamedTuple):
    """Column form of one arm's (time, event) observations"""

    time: np.ndarray
    event: np.ndarray


class EventTable(NamedTuple):
    """Risk-set tabulation at each distinct observed time"""

    times: np.ndarray
    n_at_risk: np.ndarray
    n_events: np.ndarray
    n_censored: np.ndarray


ArmInput = Union[ArmData, Iterable[Tuple[float, bool]]]


def as_arm_arrays(arm_data: ArmInput) -> ArmData:
    """
    Normalize an arm's observations to validated numpy arrays

    Args:
        arm_data: ArmData, or any iterable of (time, event) pairs

    Returns:
        ArmData with float times and boolean events
    """
    if isinstance(arm_data, ArmData):
        time = np.asarray(arm_data.time, dtype=float)
        event = np.asarray(arm_data.event).astype(bool)
    else:
        pairs = list(arm_data)
        if not pairs:
            raise EmptyArmError()
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("arm data must be (time, event) pairs")
        time = arr[:, 0]
        event = arr[:, 1].astype(bool)

    if time.size == 0:
        raise EmptyArmError()
    if time.shape != event.shape or time.ndim != 1:
        raise ValueError("time and event arrays must be one-dimensional and of equal length")
    if not np.all(np.isfinite(time)) or np.any(time < 0):
        raise ValueError("times must be finite and nonnegative")
    return ArmData(time, event)


def event_table(time: np.ndarray, event: np.ndarray) -> EventTable:
    """
    Tabulate at-risk, event and censoring counts at each distinct time

    Tied records are aggregated. Everyone observed at a time counts in that
    time's risk set, so events are processed before censorings are removed.
    """
    times, inverse = np.unique(time, return_inverse=True)
    counts = np.bincount(inverse, minlength=times.size)
    n_events = np.bincount(inverse, weights=event.astype(float), minlength=times.size)
    n_events = np.rint(n_events).astype(np.int64)
    n_at_risk = time.size - np.concatenate(([0], np.cumsum(counts)[:-1]))
    return EventTable(times, n_at_risk.astype(np.int64), n_events, counts - n_events)


@dataclass(frozen=True)
class StepFunction:
    """
    Right-continuous piecewise-constant function on [0, inf)

    The value at t is the value of the largest breakpoint <= t, or
    initial_value before the first breakpoint.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    initial_value: float

    def __post_init__(self):
        breakpoints = np.array(self.breakpoints, dtype=float)
        values = np.array(self.values, dtype=float)
        if breakpoints.ndim != 1 or breakpoints.shape != values.shape:
            raise ValueError("breakpoints and values must be one-dimensional and of equal length")
        if breakpoints.size and (breakpoints[0] < 0 or not np.all(np.isfinite(breakpoints))):
            raise ValueError("breakpoints must be finite and nonnegative")
        if np.any(np.diff(breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        breakpoints.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    @property
    def levels(self) -> np.ndarray:
        """initial_value followed by the value after each breakpoint"""
        return np.concatenate(([self.initial_value], self.values))

    def __call__(self, t):
        index = np.searchsorted(self.breakpoints, np.asarray(t, dtype=float), side="right")
        out = self.levels[index]
        return float(out) if np.ndim(out) == 0 else out

    def jumps(self) -> np.ndarray:
        """Size of the jump at each breakpoint"""
        return np.diff(self.levels)

    def cumulative_integral(self, points) -> np.ndarray:
        """
        Exact integral from 0 to each point

        Args:
            points: nonnegative evaluation points

        Returns:
            Array of the same shape as points
        """
        x = np.asarray(points, dtype=float)
        if np.any(x < 0):
            raise ValueError("integration points must be nonnegative")
        knots = np.concatenate(([0.0], self.breakpoints))
        levels = self.levels
        areas = np.concatenate(([0.0], np.cumsum(levels[:-1] * np.diff(knots))))
        k = np.searchsorted(knots, x, side="right") - 1
        return areas[k] + levels[k] * (x - knots[k])


def km_estimate(arm_data: ArmInput) -> StepFunction:
    """
    Kaplan-Meier product-limit survival estimate

    Args:
        arm_data: one arm's (time, event) observations

    Returns:
        StepFunction starting at 1 with a breakpoint at each distinct event time
    """
    data = as_arm_arrays(arm_data)
    table = event_table(data.time, data.event)
    has_event = table.n_events > 0
    d = table.n_events[has_event]
    n = table.n_at_risk[has_event]
    return StepFunction(table.times[has_event], np.cumprod(1.0 - d / n), 1.0)


def na_estimate(arm_data: ArmInput) -> StepFunction:
    """
    Nelson-Aalen cumulative hazard estimate

    Args:
        arm_data: one arm's (time, event) observations

    Returns:
        Non-decreasing StepFunction starting at 0
    """
    data = as_arm_arrays(arm_data)
    table = event_table(data.time, data.event)
    has_event = table.n_events > 0
    d = table.n_events[has_event]
    n = table.n_at_risk[has_event]
    return StepFunction(table.times[has_event], np.cumsum(d / n), 0.0)


def restricted_integral(f: StepFunction, a: float, b: float) -> float:
    """
    Exact integral of a step function over [a, b]

    Sums value times segment length over the breakpoint segments inside
    the interval; there is no quadrature error.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if a > b:
        raise ValueError(f"lower limit {a} exceeds upper limit {b}")
    if a == b:
        return 0.0
    bp = f.breakpoints
    inner = bp[(bp > a) & (bp < b)]
    knots = np.concatenate(([a], inner, [b]))
    return float(np.sum(f(knots[:-1]) * np.diff(knots)))


@dataclass(frozen=True)
class TrialDataset:
    """
    Two-arm right-censored dataset analyzed at an administrative cutoff

    Stored column-wise; ``subjects`` materializes SubjectRecords on demand.
    ``entry`` optionally holds each subject's calendar recruitment time,
    which is what allows re-censoring at an earlier calendar cutoff.
    """

    time: np.ndarray
    event: np.ndarray
    arm: np.ndarray
    cutoff: float
    entry: Optional[np.ndarray] = None

    def __post_init__(self):
        time = np.array(self.time, dtype=float)
        raw_arm = np.asarray(self.arm)
        event = np.array(self.event, dtype=bool)
        if not (time.ndim == 1 and time.shape == event.shape == raw_arm.shape):
            raise ValueError("time, event and arm must be one-dimensional and of equal length")
        if not np.all(np.isfinite(time)) or np.any(time < 0):
            raise ValueError("times must be finite and nonnegative")
        if not np.all(np.isin(raw_arm, ARMS)):
            raise ValueError("arm labels must be 0 or 1")
        cutoff = float(self.cutoff)
        if not math.isfinite(cutoff) or cutoff <= 0:
            raise ValueError(f"cutoff must be positive, got {self.cutoff!r}")
        if time.size and time.max() > cutoff:
            raise ValueError(f"follow-up time {time.max()} exceeds cutoff {cutoff}")
        arm = raw_arm.astype(np.int8)

        entry = None
        if self.entry is not None:
            entry = np.array(self.entry, dtype=float)
            if entry.shape != time.shape or not np.all(np.isfinite(entry)) or np.any(entry < 0):
                raise ValueError("entry times must be finite, nonnegative and match the records")
            entry.setflags(write=False)

        for arr in (time, event, arm):
            arr.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)
        object.__setattr__(self, "arm", arm)
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "entry", entry)

    @classmethod
    def from_records(cls, records: Iterable[SubjectRecord],
                     cutoff: Optional[float] = None) -> "TrialDataset":
        """Build a dataset from SubjectRecords; cutoff defaults to the maximum time"""
        records = list(records)
        time = np.array([r.time for r in records], dtype=float)
        event = np.array([r.event for r in records], dtype=bool)
        arm = np.array([r.arm for r in records], dtype=np.int8)
        if cutoff is None:
            cutoff = float(time.max()) if time.size else 0.0
        return cls(time, event, arm, cutoff)

    @classmethod
    def from_frame(cls, df: pd.DataFrame, cutoff: Optional[float] = None) -> "TrialDataset":
        """Build a dataset from a DataFrame with time, event and arm columns"""
        time = df["time"].to_numpy(dtype=float)
        if cutoff is None:
            cutoff = float(time.max()) if time.size else 0.0
        entry = df["entry"].to_numpy(dtype=float) if "entry" in df.columns else None
        return cls(time, df["event"].to_numpy(), df["arm"].to_numpy(), cutoff, entry)

    def __len__(self) -> int:
        return int(self.time.size)

    @property
    def subjects(self) -> Tuple[SubjectRecord, ...]:
        return tuple(
            SubjectRecord(int(a), float(t), bool(e))
            for t, e, a in zip(self.time, self.event, self.arm)
        )

    def to_frame(self) -> pd.DataFrame:
        """Return the records as a DataFrame with columns time, event, arm"""
        return pd.DataFrame({
            "time": self.time,
            "event": self.event.astype(int),
            "arm": self.arm.astype(int),
        })

    def arm_data(self, arm: int) -> ArmData:
        mask = self.arm == arm
        return ArmData(self.time[mask], self.event[mask])

    def arm_counts(self) -> Dict[int, int]:
        return {a: int(np.count_nonzero(self.arm == a)) for a in ARMS}

    def event_count(self) -> int:
        return int(np.count_nonzero(self.event))

    def events_after(self, t: float) -> int:
        """Number of observed events with follow-up time strictly after t"""
        return int(np.count_nonzero(self.event & (self.time > t)))

    def require_both_arms(self) -> None:
        for arm, count in self.arm_counts().items():
            if count == 0:
                raise EmptyArmError(f"empty arm: no subjects in arm {arm}")

    def swap_arms(self) -> "TrialDataset":
        """Relabel arm 0 as arm 1 and vice versa"""
        return TrialDataset(self.time, self.event, 1 - self.arm, self.cutoff, self.entry)

    def recensor(self, cutoff: float) -> "TrialDataset":
        """
        Administratively censor at an earlier calendar cutoff

        Each subject's potential follow-up becomes cutoff - entry; events
        observed after that point become censorings.
        """
        if self.entry is None:
            raise ValueError("re-censoring requires entry (recruitment) times")
        if cutoff > self.cutoff:
            raise ValueError(f"new cutoff {cutoff} is later than current cutoff {self.cutoff}")
        potential = np.maximum(cutoff - self.entry, 0.0)
        time = np.minimum(self.time, potential)
        event = self.event & (self.time <= potential)
        return TrialDataset(time, event, self.arm, cutoff, self.entry)

    def truncate(self, t: float) -> "TrialDataset":
        """Censor every record's follow-up at time t (study time, not calendar time)"""
        if t <= 0:
            raise ValueError(f"truncation time must be positive, got {t}")
        time = np.minimum(self.time, t)
        event = self.event & (self.time <= t)
        return TrialDataset(time, event, self.arm, min(self.cutoff, t), self.entry)
