# models/series.py
"""관측 시계열, 디코딩 경로, 사후확률 모델"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from config.constants import POSTERIOR_TOL, SPACING_TOL
from core.errors import ValidationError, require
from models.state_space import StateSpace


def _readonly(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ObservationSeries:
    """균일 간격 초과 CO2 시계열 y_0..y_T"""
    timestamps: np.ndarray  # 분
    y: np.ndarray  # ppm (x - x0)

    def __post_init__(self):
        object.__setattr__(self, "timestamps", _readonly(self.timestamps, float))
        object.__setattr__(self, "y", _readonly(self.y, float))

        require(self.y.ndim == 1 and self.timestamps.shape == self.y.shape,
                "series.y", "timestamps and values must be 1-d arrays of equal length")
        require(self.y.size >= 2, "series.y", f"at least 2 observations are required (got {self.y.size})")
        require(bool(np.all(np.isfinite(self.y))), "series.y", "values must be finite")
        require(bool(np.all(np.isfinite(self.timestamps))), "series.timestamps", "must be finite")

        gaps = np.diff(self.timestamps)
        require(bool(np.all(gaps > 0)), "series.timestamps", "must be strictly increasing")
        dt = gaps.mean()
        require(bool(np.all(np.abs(gaps - dt) <= SPACING_TOL * dt)),
                "series.timestamps", "spacing must be uniform")

    @classmethod
    def from_values(cls, y, dt: float = 1.0, t0: float = 0.0) -> "ObservationSeries":
        """값 배열에서 균일 타임스탬프로 생성"""
        y = np.asarray(y, dtype=float)
        return cls(timestamps=t0 + dt * np.arange(y.size), y=y)

    @property
    def dt(self) -> float:
        return float(np.diff(self.timestamps).mean())

    @property
    def n_transitions(self) -> int:
        """T (전이 개수)"""
        return int(self.y.size - 1)

    def lagged(self):
        """(y_{t-1}, y_t) 쌍, t = 1..T"""
        return self.y[:-1], self.y[1:]

    def __len__(self) -> int:
        return int(self.y.size)


@dataclass(frozen=True, eq=False)
class OccupancyLabels:
    """전이별 참값 라벨 (occupancy, regime)"""
    occupancy: np.ndarray
    regime: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "occupancy", _readonly(self.occupancy, int))
        require(self.occupancy.ndim == 1, "labels.occupancy", "must be 1-d")
        require(bool(np.all(self.occupancy >= 0)), "labels.occupancy", "must be >= 0")
        if self.regime is not None:
            object.__setattr__(self, "regime", _readonly(self.regime, int))
            require(self.regime.shape == self.occupancy.shape, "labels.regime",
                    "length must match occupancy")
            require(bool(np.all(self.regime >= 0)), "labels.regime", "must be >= 0")

    def __len__(self) -> int:
        return int(self.occupancy.size)


@dataclass(frozen=True, eq=False)
class DecodedPath:
    """디코딩된 상태열 S_1..S_T (S_t 는 y_{t-1} -> y_t 전이를 설명)"""
    states: np.ndarray
    occupancy: np.ndarray
    regime: np.ndarray
    posterior_max: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("states", "occupancy", "regime"):
            object.__setattr__(self, name, _readonly(getattr(self, name), int))
        require(self.states.ndim == 1, "path.states", "must be 1-d")
        require(self.occupancy.shape == self.states.shape and self.regime.shape == self.states.shape,
                "path.occupancy", "derived arrays must match the state sequence")
        require(bool(np.all(self.states >= 0)), "path.states", "indices must be >= 0")
        if self.posterior_max is not None:
            object.__setattr__(self, "posterior_max", _readonly(self.posterior_max, float))
            require(self.posterior_max.shape == self.states.shape, "path.posterior_max",
                    "length must match the state sequence")

    @classmethod
    def from_states(cls, states, space: Optional[StateSpace] = None,
                    posterior_max=None, n_states: Optional[int] = None) -> "DecodedPath":
        """상태 인덱스에서 경로 생성. 상태 공간이 없으면 인덱스를 인원으로 해석

        n_states 가 주어지면 인덱스가 [0, n_states) 안에 있어야 한다.
        """
        states = np.asarray(states, dtype=int)
        if n_states is not None:
            if space is not None and space.size != n_states:
                raise ValidationError(f"path.states: n_states {n_states} does not match state space size {space.size}")
            if states.size and (states.min() < 0 or states.max() >= n_states):
                raise ValidationError(f"path.states: indices must lie in [0, {n_states})")
        if space is None:
            occupancy = states.copy()
            regime = np.zeros_like(states)
        else:
            if states.size and (states.min() < 0 or states.max() >= space.size):
                raise ValidationError(f"path.states: indices must lie in [0, {space.size})")
            occupancy = space.occupancy_array()[states]
            regime = space.regime_array()[states]
        return cls(states=states, occupancy=occupancy, regime=regime, posterior_max=posterior_max)

    def with_posterior(self, posterior_max) -> "DecodedPath":
        return DecodedPath(self.states, self.occupancy, self.regime, posterior_max)

    def to_frame(self, timestamps) -> pd.DataFrame:
        """CSV 내보내기용 DataFrame (타임스탬프는 t = 1..T)"""
        timestamps = np.asarray(timestamps, dtype=float)
        require(timestamps.size == self.states.size, "path.timestamps",
                "one timestamp per decoded step is required")
        posterior = self.posterior_max if self.posterior_max is not None else np.full(self.states.size, np.nan)
        return pd.DataFrame({
            "timestamp_min": timestamps,
            "state": self.states,
            "occupancy": self.occupancy,
            "regime": self.regime,
            "posterior_max": posterior,
        })

    def __len__(self) -> int:
        return int(self.states.size)


@dataclass(frozen=True, eq=False)
class PosteriorMatrix:
    """평활 사후확률 q_t(i) = P(S_t = i | Y, theta), T x N"""
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _readonly(self.q, float))
        require(self.q.ndim == 2, "posterior.q", "must be a T x N matrix")
        require(bool(np.all((self.q >= -POSTERIOR_TOL) & (self.q <= 1 + POSTERIOR_TOL))),
                "posterior.q", "entries must lie in [0, 1]")
        row_err = np.abs(self.q.sum(axis=1) - 1.0)
        require(bool(np.all(row_err <= POSTERIOR_TOL)), "posterior.q", "rows must sum to 1")

    @property
    def n_states(self) -> int:
        return int(self.q.shape[1])

    def argmax_path(self, space: Optional[StateSpace] = None) -> DecodedPath:
        """사후확률 최대 상태열 (MPM)"""
        states = self.q.argmax(axis=1)
        return DecodedPath.from_states(states, space, posterior_max=self.q.max(axis=1))


@dataclass(frozen=True, eq=False)
class LabeledTrace:
    """시뮬레이션 결과: 관측열 + 전이별 참값 라벨"""
    series: ObservationSeries
    truth: OccupancyLabels
    clamp_count: int = 0

    def __post_init__(self):
        require(len(self.truth) == len(self.series) - 1, "trace.truth",
                f"label length must be series length - 1 ({len(self.series) - 1}), got {len(self.truth)}")
