"""Discrete-event simulator for monolithic and chiplet-based multi-die SoCs."""

from .config import ConfigError, SystemSpec, parse_config, serialize_config, validate
from .kernel import Kernel, SimulationError
from .power import flow_latency_stats
from .presets import build_preset, preset
from .system import build_system, simulate

__all__ = [
    "ConfigError",
    "Kernel",
    "SimulationError",
    "SystemSpec",
    "build_preset",
    "build_system",
    "flow_latency_stats",
    "parse_config",
    "preset",
    "serialize_config",
    "simulate",
    "validate",
]
