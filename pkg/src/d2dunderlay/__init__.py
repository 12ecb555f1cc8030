"""Simulation and analysis of D2D links underlaying a cellular uplink."""

from .netmodel import ConfigError, SystemConfig, db_to_linear, linear_to_db, validate
from .simkernel import Scheme, SweepResult, estimate

__all__ = ["ConfigError", "Scheme", "SweepResult", "SystemConfig", "db_to_linear",
           "estimate", "linear_to_db", "validate"]
__version__ = "0.1.0"
