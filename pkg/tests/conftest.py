# tests/conftest.py
"""공용 픽스처"""

import pytest

from models.physics import PhysicsConfig
from models.schedule import Schedule
from models.state_space import build_state_space
from models.switching_ar import init_from_physics
from services.simulation_service import SimulationService


@pytest.fixture
def physics():
    return PhysicsConfig()


@pytest.fixture
def single_physics():
    return PhysicsConfig(regimes=(100.0,), max_occupancy=2)


@pytest.fixture
def step_schedule():
    """긴 체류 구간만으로 된 단일 모드 스케줄"""
    return Schedule(steps=((60, 0, 0), (80, 2, 0), (60, 1, 0), (100, 0, 0), (50, 2, 0), (70, 1, 0)))


@pytest.fixture
def noise_free_trace(single_physics, step_schedule):
    return SimulationService.simulate(single_physics, step_schedule, y0=0.0, noise_sd=0.0, seed=0)


@pytest.fixture
def true_single_model(single_physics):
    return init_from_physics(single_physics, build_state_space(single_physics), sigma0=2.0, self_stay=0.95)


@pytest.fixture
def day_trace(physics):
    schedule = SimulationService.random_schedule(physics, 600, 45, 180, seed=11)
    return SimulationService.simulate(physics, schedule, y0=0.0, noise_sd=2.0, seed=12)
