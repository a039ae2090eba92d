# config/__init__.py
from .constants import *
from .default_experiments import DEFAULT_EXPERIMENT, EXPERIMENT_PRESETS
