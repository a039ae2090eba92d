# models/schedule.py
"""재실/환기 스케줄 모델"""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from core.errors import ValidationError, require


@dataclass(frozen=True)
class ScheduleStep:
    """구간 하나 (지속 시간, 인원, 환기 모드)"""
    duration: float
    occupancy: int
    regime: int

    def __post_init__(self):
        require(math.isfinite(self.duration) and self.duration > 0, "schedule.duration",
                f"must be > 0 (got {self.duration})")
        require(self.occupancy >= 0, "schedule.occupancy", f"must be >= 0 (got {self.occupancy})")
        require(self.regime >= 0, "schedule.regime", f"must be >= 0 (got {self.regime})")

    def to_dict(self) -> dict:
        return {"duration": float(self.duration), "occupancy": int(self.occupancy), "regime": int(self.regime)}


@dataclass(frozen=True)
class Schedule:
    """구간별 상수 스케줄"""
    steps: Tuple[ScheduleStep, ...] = field(default_factory=tuple)

    def __post_init__(self):
        steps = tuple(
            s if isinstance(s, ScheduleStep) else ScheduleStep(float(s[0]), int(s[1]), int(s[2]))
            for s in self.steps
        )
        object.__setattr__(self, "steps", steps)
        require(len(steps) > 0, "schedule.steps", "at least one step is required")

    @property
    def total_minutes(self) -> float:
        return float(sum(s.duration for s in self.steps))

    def validate_against(self, max_occupancy: int, n_regimes: int):
        """물리 설정과의 정합성 검사"""
        for j, step in enumerate(self.steps):
            if step.occupancy > max_occupancy:
                raise ValidationError(
                    f"schedule.steps[{j}].occupancy: {step.occupancy} exceeds max_occupancy {max_occupancy}")
            if step.regime >= n_regimes:
                raise ValidationError(
                    f"schedule.steps[{j}].regime: unknown regime {step.regime} (have {n_regimes})")

    def expand(self, dt: float) -> Tuple[np.ndarray, np.ndarray]:
        """스텝별 (occupancy, regime) 배열. 스텝 t 는 시작 시각 t*dt 의 구간 값"""
        ends = np.cumsum([s.duration for s in self.steps])
        n_steps = int(math.floor(ends[-1] / dt + 1e-9))
        starts = dt * np.arange(n_steps)
        idx = np.searchsorted(ends, starts + 1e-9 * dt, side="right")
        idx = np.minimum(idx, len(self.steps) - 1)
        occupancy = np.array([self.steps[j].occupancy for j in idx], dtype=int)
        regime = np.array([self.steps[j].regime for j in idx], dtype=int)
        return occupancy, regime

    @classmethod
    def from_arrays(cls, occupancy, regime, dt: float) -> "Schedule":
        """스텝별 배열을 런 길이 구간으로 압축"""
        occupancy = np.asarray(occupancy, dtype=int)
        regime = np.asarray(regime, dtype=int)
        steps: List[ScheduleStep] = []
        start = 0
        for t in range(1, occupancy.size + 1):
            if t == occupancy.size or occupancy[t] != occupancy[start] or regime[t] != regime[start]:
                steps.append(ScheduleStep((t - start) * dt, int(occupancy[start]), int(regime[start])))
                start = t
        return cls(steps=tuple(steps))

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        """딕셔너리에서 Schedule 생성"""
        return cls(steps=tuple(
            ScheduleStep(float(s["duration"]), int(s["occupancy"]), int(s["regime"]))
            for s in data.get("steps", [])
        ))

    def to_dict(self) -> dict:
        return {"steps": [s.to_dict() for s in self.steps]}

    def __len__(self) -> int:
        return len(self.steps)
