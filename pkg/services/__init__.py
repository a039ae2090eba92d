# services/__init__.py
from .simulation_service import SimulationService, simulate, random_schedule
from .data_service import DataService, load_series, load_trace, write_trace, save_model, load_model
from .evaluation_service import EvaluationService, score, synthetic_benchmark, ventilation_sweep
