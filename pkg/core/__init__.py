# core/__init__.py
from .errors import (
    OccupancyError, ValidationError, DataIOError, NumericalError,
    DegenerateSegmentError, InitializationError, require,
)
from .logging_setup import setup_logging
