# services/simulation_service.py
"""합성 CO2 트레이스 생성 서비스"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from config.constants import STEP_MOVE_WEIGHT
from core.errors import require
from models.physics import PhysicsConfig
from models.schedule import Schedule
from models.series import LabeledTrace, ObservationSeries, OccupancyLabels

logger = logging.getLogger(__name__)


class SimulationService:
    """물리 모델 기반 시뮬레이터"""

    # === 트레이스 ===

    @staticmethod
    def simulate(physics: PhysicsConfig, schedule: Schedule, y0: float = 0.0,
                 noise_sd: float = 0.0, seed: int = 0) -> LabeledTrace:
        """y_{t+1} = c_k y_t + (1 - c_k) tau_k r n_t + w_t 반복

        라벨 t 는 y_t -> y_{t+1} 전이 구간의 (인원, 환기 모드).
        노이즈로 음수가 되면 0 으로 자르고 횟수를 기록한다.
        """
        require(math.isfinite(y0) and y0 >= 0, "simulation.y0", f"must be >= 0 (got {y0})")
        require(math.isfinite(noise_sd) and noise_sd >= 0, "simulation.noise_sd",
                f"must be >= 0 (got {noise_sd})")
        schedule.validate_against(physics.max_occupancy, physics.n_regimes)

        occupancy, regime = schedule.expand(physics.dt)
        require(occupancy.size >= 1, "schedule.steps", f"total duration shorter than dt={physics.dt}")

        coeffs = np.array([physics.ar_coefficient(k) for k in range(physics.n_regimes)])
        taus = np.array(physics.regimes)
        c_t = coeffs[regime]
        mu_t = (1.0 - c_t) * taus[regime] * physics.person_rate * occupancy

        rng = np.random.default_rng(seed)
        noise = rng.normal(0.0, noise_sd, size=occupancy.size) if noise_sd > 0 else np.zeros(occupancy.size)

        y = np.empty(occupancy.size + 1)
        y[0] = y0
        clamps = 0
        for t in range(occupancy.size):
            value = c_t[t] * y[t] + mu_t[t] + noise[t]
            if value < 0:
                value = 0.0
                clamps += 1
            y[t + 1] = value

        if clamps:
            logger.warning("simulate: %d negative samples clamped to 0", clamps)

        series = ObservationSeries.from_values(y, dt=physics.dt)
        return LabeledTrace(series=series, truth=OccupancyLabels(occupancy, regime), clamp_count=clamps)

    # === 스케줄 ===

    @staticmethod
    def random_schedule(physics: PhysicsConfig, total_minutes: float, mean_dwell: float,
                        regime_mean_dwell: float, seed: int = 0,
                        occupied_window: Optional[Tuple[float, float]] = None) -> Schedule:
        """기하분포 체류 시간의 구간별 상수 재실/환기 스케줄

        인원은 0 에서 시작해 변화 시점마다 +-1 (가중치 STEP_MOVE_WEIGHT) 또는
        인접하지 않은 수준으로 이동. 환기 모드는 독립 과정으로 다른 모드로 전환.
        occupied_window (분, [시작, 끝)) 밖에서는 인원이 0 으로 고정된다.
        """
        require(math.isfinite(mean_dwell) and mean_dwell > 0, "simulation.mean_dwell",
                f"must be > 0 (got {mean_dwell})")
        require(math.isfinite(total_minutes) and total_minutes >= mean_dwell, "simulation.total_minutes",
                f"must be >= mean_dwell {mean_dwell} (got {total_minutes})")
        require(math.isfinite(regime_mean_dwell) and regime_mean_dwell > 0, "simulation.regime_mean_dwell",
                f"must be > 0 (got {regime_mean_dwell})")
        if occupied_window is not None:
            start, end = (float(v) for v in occupied_window)
            require(0 <= start < end, "simulation.occupied_window",
                    f"must be [start, end] with 0 <= start < end (got [{start}, {end}])")

        n_steps = int(math.floor(total_minutes / physics.dt + 1e-9))
        require(n_steps >= 1, "simulation.total_minutes", f"shorter than dt={physics.dt}")

        rng = np.random.default_rng(seed)
        p_move = min(1.0, physics.dt / mean_dwell)
        p_switch = min(1.0, physics.dt / regime_mean_dwell)
        levels = np.arange(physics.max_occupancy + 1)

        occupancy = np.zeros(n_steps, dtype=int)
        regime = np.zeros(n_steps, dtype=int)
        current_n, current_k = 0, 0
        for t in range(n_steps):
            inside = occupied_window is None or start <= t * physics.dt < end
            if t > 0 and physics.max_occupancy > 0 and rng.random() < p_move and inside:
                current_n = _next_level(rng, current_n, levels)
            if not inside:
                current_n = 0
            if t > 0 and physics.n_regimes > 1 and rng.random() < p_switch:
                others = [k for k in range(physics.n_regimes) if k != current_k]
                current_k = int(others[rng.integers(len(others))])
            occupancy[t] = current_n
            regime[t] = current_k

        return Schedule.from_arrays(occupancy, regime, physics.dt)


def _next_level(rng: np.random.Generator, current: int, levels: np.ndarray) -> int:
    adjacent = levels[np.abs(levels - current) == 1]
    jumps = levels[np.abs(levels - current) > 1]
    if jumps.size == 0 or (adjacent.size > 0 and rng.random() < STEP_MOVE_WEIGHT):
        return int(adjacent[rng.integers(adjacent.size)])
    return int(jumps[rng.integers(jumps.size)])


def simulate(physics: PhysicsConfig, schedule: Schedule, y0: float = 0.0,
             noise_sd: float = 0.0, seed: int = 0) -> LabeledTrace:
    return SimulationService.simulate(physics, schedule, y0, noise_sd, seed)


def random_schedule(physics: PhysicsConfig, total_minutes: float, mean_dwell: float,
                    regime_mean_dwell: float, seed: int = 0,
                    occupied_window: Optional[Tuple[float, float]] = None) -> Schedule:
    return SimulationService.random_schedule(physics, total_minutes, mean_dwell, regime_mean_dwell, seed,
                                             occupied_window)
