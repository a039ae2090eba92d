# models/physics.py
"""물리 파라미터 모델"""

import math
from dataclasses import dataclass
from typing import Tuple

from config.constants import (
    DEFAULT_AMBIENT_CO2, DEFAULT_REGIMES, DEFAULT_PERSON_RATE,
    DEFAULT_DT, DEFAULT_MAX_OCCUPANCY,
)
from core.errors import require


@dataclass(frozen=True)
class PhysicsConfig:
    """CO2 동역학 파라미터 (x0, tau, r, dt)"""
    ambient_co2: float = DEFAULT_AMBIENT_CO2
    regimes: Tuple[float, ...] = DEFAULT_REGIMES  # 환기 시간 tau_k (분)
    person_rate: float = DEFAULT_PERSON_RATE
    dt: float = DEFAULT_DT
    max_occupancy: int = DEFAULT_MAX_OCCUPANCY

    def __post_init__(self):
        object.__setattr__(self, "regimes", tuple(float(t) for t in self.regimes))
        self.validate()

    def validate(self):
        """불변식 검사"""
        require(len(self.regimes) > 0, "physics.regimes", "at least one ventilation time is required")
        for tau in self.regimes:
            require(math.isfinite(tau) and tau > 0, "physics.regimes",
                    f"ventilation times must be > 0 (got {tau})")
        require(len(set(self.regimes)) == len(self.regimes), "physics.regimes",
                "ventilation times must be distinct")
        require(math.isfinite(self.person_rate) and self.person_rate > 0,
                "physics.person_rate", f"must be > 0 (got {self.person_rate})")
        require(math.isfinite(self.dt) and self.dt > 0, "physics.dt", f"must be > 0 (got {self.dt})")
        require(int(self.max_occupancy) == self.max_occupancy and self.max_occupancy >= 0,
                "physics.max_occupancy", f"must be an integer >= 0 (got {self.max_occupancy})")
        require(math.isfinite(self.ambient_co2) and self.ambient_co2 >= 0,
                "physics.ambient_co2", f"must be >= 0 (got {self.ambient_co2})")

    @property
    def n_regimes(self) -> int:
        return len(self.regimes)

    def ar_coefficient(self, regime: int) -> float:
        """c = exp(-dt/tau)"""
        return math.exp(-self.dt / self.regimes[regime])

    def drift(self, occupancy: int, regime: int) -> float:
        """mu = (1 - c) * tau * r * n (1스텝 정확 적분)"""
        c = self.ar_coefficient(regime)
        return (1.0 - c) * self.regimes[regime] * self.person_rate * occupancy

    def steady_state(self, occupancy: int, regime: int) -> float:
        """평형 초과 농도 tau * r * n"""
        return self.regimes[regime] * self.person_rate * occupancy

    def with_regimes(self, regimes) -> "PhysicsConfig":
        """환기 시간만 교체한 사본"""
        return PhysicsConfig(
            ambient_co2=self.ambient_co2,
            regimes=tuple(regimes),
            person_rate=self.person_rate,
            dt=self.dt,
            max_occupancy=self.max_occupancy,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicsConfig":
        """딕셔너리에서 PhysicsConfig 생성"""
        regimes = data.get("regimes", DEFAULT_REGIMES)
        if isinstance(regimes, (int, float)):
            regimes = [regimes]
        return cls(
            ambient_co2=float(data.get("ambient_co2", DEFAULT_AMBIENT_CO2)),
            regimes=tuple(float(t) for t in regimes),
            person_rate=float(data.get("person_rate", DEFAULT_PERSON_RATE)),
            dt=float(data.get("dt", DEFAULT_DT)),
            max_occupancy=int(data.get("max_occupancy", DEFAULT_MAX_OCCUPANCY)),
        )

    def to_dict(self) -> dict:
        """딕셔너리로 변환"""
        return {
            "ambient_co2": float(self.ambient_co2),
            "regimes": [float(t) for t in self.regimes],
            "person_rate": float(self.person_rate),
            "dt": float(self.dt),
            "max_occupancy": int(self.max_occupancy),
        }
