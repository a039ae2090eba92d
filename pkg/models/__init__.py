# models/__init__.py
from .physics import PhysicsConfig
from .state_space import StateSpace, build_state_space
from .switching_ar import SwitchingARModel, init_from_physics, implied_ventilation_times
from .series import (
    ObservationSeries,
    OccupancyLabels,
    DecodedPath,
    PosteriorMatrix,
    LabeledTrace,
)
from .schedule import Schedule, ScheduleStep
from .simple_hmm import SimpleHMM
from .metrics import MetricsReport
