# models/state_space.py
"""은닉 상태 공간 모델 (재실 인원 x 환기 모드)"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from core.errors import ValidationError, require
from models.physics import PhysicsConfig


@dataclass(frozen=True)
class StateSpace:
    """(occupancy, regime) 상태 열거. 인원 우선, 모드 후순위 정렬"""
    max_occupancy: int
    n_regimes: int
    states: Tuple[Tuple[int, int], ...] = field(init=False)
    _index: Dict[Tuple[int, int], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        require(self.max_occupancy >= 0, "states.max_occupancy", "must be >= 0")
        require(self.n_regimes >= 1, "states.n_regimes", "must be >= 1")
        states = tuple(
            (n, k)
            for n in range(self.max_occupancy + 1)
            for k in range(self.n_regimes)
        )
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    @property
    def size(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def lookup(self, index: int) -> Tuple[int, int]:
        """상태 인덱스 -> (occupancy, regime)"""
        if not 0 <= index < len(self.states):
            raise ValidationError(f"states.index: {index} outside [0, {len(self.states)})")
        return self.states[index]

    def index_of(self, occupancy: int, regime: int) -> int:
        """(occupancy, regime) -> 상태 인덱스"""
        key = (int(occupancy), int(regime))
        if key not in self._index:
            raise ValidationError(f"states.lookup: unknown state {key}")
        return self._index[key]

    def occupancy_array(self) -> np.ndarray:
        return np.array([n for n, _ in self.states], dtype=int)

    def regime_array(self) -> np.ndarray:
        return np.array([k for _, k in self.states], dtype=int)

    def indices_for_regime(self, regime: int) -> List[int]:
        """같은 환기 모드를 공유하는 상태 목록"""
        return [i for i, (_, k) in enumerate(self.states) if k == regime]

    def encode(self, occupancy: np.ndarray, regime: np.ndarray) -> np.ndarray:
        """라벨 배열을 상태 인덱스 배열로 변환"""
        occupancy = np.asarray(occupancy, dtype=int)
        regime = np.asarray(regime, dtype=int)
        if occupancy.size and (occupancy.min() < 0 or occupancy.max() > self.max_occupancy):
            raise ValidationError("states.occupancy: label outside state space")
        if regime.size and (regime.min() < 0 or regime.max() >= self.n_regimes):
            raise ValidationError("states.regime: label outside state space")
        return occupancy * self.n_regimes + regime

    def to_dict(self) -> dict:
        """딕셔너리로 변환"""
        return {
            "max_occupancy": int(self.max_occupancy),
            "n_regimes": int(self.n_regimes),
            "states": [[n, k] for n, k in self.states],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StateSpace":
        """딕셔너리에서 StateSpace 생성 (states 목록은 검증용)"""
        space = cls(
            max_occupancy=int(data.get("max_occupancy", 0)),
            n_regimes=int(data.get("n_regimes", 1)),
        )
        listed = data.get("states")
        if listed is not None and [tuple(s) for s in listed] != list(space.states):
            raise ValidationError("states: listed states do not match occupancy-major ordering")
        return space


def build_state_space(physics: PhysicsConfig) -> StateSpace:
    """물리 설정으로부터 상태 공간 생성"""
    physics.validate()
    return StateSpace(max_occupancy=int(physics.max_occupancy), n_regimes=physics.n_regimes)
