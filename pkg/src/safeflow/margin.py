"""Safety margins, the Chernoff-type tail bound and the trial failure bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instance import Instance

E_MINUS_1 = math.e - 1.0


class CapacityTooSmall(ValueError):
    """An edge is too thin for the margin formula to give a usable factor."""

    def __init__(self, edge_id: int, capacity: float, required: float, rho: float):
        self.edge_id = edge_id
        self.capacity = capacity
        self.required = required
        self.rho = rho
        super().__init__(
            f"edge {edge_id}: capacity {capacity:g} gives rho={rho:.6g}; "
            f"margin needs capacity > {required:.6g}"
        )


def min_capacity(m: int) -> float:
    """Capacity at which ``rho`` hits zero: ``(e-1)^2 ln 2m``."""
    return E_MINUS_1**2 * math.log(2 * m)


def rho(capacity: float, m: int) -> float:
    """Safety factor ``1 - (e-1) sqrt(ln(2m) / capacity)``. Can be <= 0."""
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    if m < 1:
        raise ValueError("m must be >= 1")
    return 1.0 - E_MINUS_1 * math.sqrt(math.log(2 * m) / capacity)


@dataclass(frozen=True)
class SafetyParams:
    rho: tuple[float, ...]
    shrunk_capacity: tuple[float, ...]
    m: int

    @property
    def shrunk(self) -> np.ndarray:
        return np.array(self.shrunk_capacity, dtype=float)


def safety_params(instance: Instance, rho_floor: float = 0.0) -> SafetyParams:
    """Per-edge factors and shrunk capacities for a normalized instance.

    Raises CapacityTooSmall for the first edge whose factor is ``<= rho_floor``.
    """
    m = instance.m
    rhos = []
    for e in instance.edges:
        r = rho(e.capacity, m)
        if r <= rho_floor:
            raise CapacityTooSmall(e.id, e.capacity, min_capacity(m), r)
        rhos.append(r)
    shrunk = tuple(r * e.capacity for r, e in zip(rhos, instance.edges))
    return SafetyParams(tuple(rhos), shrunk, m)


@dataclass(frozen=True)
class TailQuery:
    delta: float
    expected: float
    epsilon: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.expected <= 0:
            raise ValueError("expected must be > 0")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    def bound(self) -> float:
        return chernoff_tail(self.delta, self.expected)

    def satisfied(self) -> bool:
        return self.bound() <= self.epsilon


def log_chernoff_tail(delta: float, expected: float) -> float:
    """Natural log of :func:`chernoff_tail`; stays informative where the bound underflows."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if expected <= 0:
        raise ValueError("expected must be > 0")
    return expected * (delta - (1.0 + delta) * math.log1p(delta))


def chernoff_tail(delta: float, expected: float) -> float:
    """Upper bound on ``Pr(X > (1 + delta) * expected)`` for a sum of
    independent [0, 1]-weighted indicators with mean ``expected``.

    Evaluated as ``exp(F (delta - (1 + delta) ln(1 + delta)))``.
    """
    return math.exp(log_chernoff_tail(delta, expected))


def delta_for_epsilon(epsilon: float, expected: float) -> float:
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if expected <= 0:
        raise ValueError("expected must be > 0")
    return E_MINUS_1 * math.sqrt(math.log(1.0 / epsilon) / expected)


def capacity_condition_holds(capacity: float, flow: float, m: int) -> bool:
    """Whether ``capacity >= (1 + (e-1) sqrt(ln(2m) / flow)) * flow``."""
    if capacity <= 0 or flow <= 0 or m < 1:
        raise ValueError("capacity, flow must be positive and m >= 1")
    return capacity >= (1.0 + E_MINUS_1 * math.sqrt(math.log(2 * m) / flow)) * flow


def max_flow_for_capacity(capacity: float, m: int) -> float:
    """Largest flow for which :func:`capacity_condition_holds` is true.

    Solves ``F + (e-1) sqrt(ln(2m) F) = C`` for ``F`` (a quadratic in sqrt(F)).
    """
    b = E_MINUS_1 * math.sqrt(math.log(2 * m))
    root = (-b + math.sqrt(b * b + 4.0 * capacity)) / 2.0
    return root * root


def union_bound(capacities, loads) -> float:
    """Sum over loaded edges of the tail bound with ``delta_j = C_j / F_j - 1``.

    Edges with zero expected load cannot be overloaded and contribute nothing.
    An edge whose expected load already reaches capacity contributes 1.
    """
    total = 0.0
    for c, f in zip(capacities, loads):
        if f <= 0:
            continue
        if f >= c:
            total += 1.0
            continue
        total += chernoff_tail(c / f - 1.0, f)
    return total


def failure_bound(r: int) -> float:
    """Probability bound for ``r`` independent failed trials: ``2**-r``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return 2.0**-r
