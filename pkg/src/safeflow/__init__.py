"""Unsplittable flow by safe-margin relaxation and flow-proportional rounding."""

from .instance import (
    Demand,
    Edge,
    Instance,
    normalize,
    read_instance,
    validate,
    write_instance,
)
from .margin import CapacityTooSmall, SafetyParams, rho, safety_params
from .mcmf import FlowSolution, NoSafeSolution, relax
from .rounding import DriverConfig, PathSystem, RoundingReport, solve

__all__ = [
    "CapacityTooSmall",
    "Demand",
    "DriverConfig",
    "Edge",
    "FlowSolution",
    "Instance",
    "NoSafeSolution",
    "PathSystem",
    "RoundingReport",
    "SafetyParams",
    "normalize",
    "read_instance",
    "relax",
    "rho",
    "safety_params",
    "solve",
    "validate",
    "write_instance",
]
