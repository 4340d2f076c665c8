"""Passive-trace target tracking in wireless sensor networks.

Sensor nodes record and spread decaying traces of a moving target; a mobile
agent climbs the trace gradient to find it. Everything runs inside a
deterministic continuous-time discrete-event simulator.
"""

from .config import ConfigError, SimConfig, parse_config
from .engine import Event, EventKind, Scheduler
from .simulation import Simulation

__all__ = [
    "ConfigError",
    "Event",
    "EventKind",
    "Scheduler",
    "SimConfig",
    "Simulation",
    "parse_config",
]

__version__ = "0.1.0"
