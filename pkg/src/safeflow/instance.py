"""Problem instances: data model, validation, normalization, I/O and generation."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

SCHEMA_VERSION = 1


class InvalidInstance(ValueError):
    pass


class GenerationFailed(RuntimeError):
    pass


class ParseError(ValueError):
    """Raised when an instance file cannot be decoded.

    ``field`` names the offending JSON path (e.g. ``edges[3].capacity``)
    and ``line`` is set when the failure is a JSON syntax error.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        parts = [message]
        if field is not None:
            parts.append(f"field={field}")
        if line is not None:
            parts.append(f"line={line}")
        super().__init__(" ".join(parts) if len(parts) > 1 else message)


class SchemaVersionError(ParseError):
    pass


@dataclass(frozen=True)
class Edge:
    id: int
    tail: int
    head: int
    capacity: float
    cost: float


@dataclass(frozen=True)
class Demand:
    id: int
    source: int
    target: int
    value: float


@dataclass(frozen=True)
class Instance:
    """Directed multigraph with per-edge capacity/cost and a list of demands.

    Edge ``j`` runs ``tail -> head``. Ids are the positions in ``edges`` and
    ``demands``; use :meth:`build` to construct from plain tuples.
    """

    node_count: int
    edges: tuple[Edge, ...]
    demands: tuple[Demand, ...]

    @classmethod
    def build(
        cls,
        node_count: int,
        edges: Iterable[Sequence[float]],
        demands: Iterable[Sequence[float]],
    ) -> Instance:
        """``edges`` as ``(tail, head, capacity, cost)``, ``demands`` as ``(source, target, value)``."""
        es = tuple(
            Edge(j, int(u), int(v), float(c), float(w)) for j, (u, v, c, w) in enumerate(edges)
        )
        ds = tuple(Demand(i, int(s), int(t), float(val)) for i, (s, t, val) in enumerate(demands))
        return cls(int(node_count), es, ds)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def k(self) -> int:
        return len(self.demands)

    @property
    def capacities(self) -> np.ndarray:
        return np.array([e.capacity for e in self.edges], dtype=float)

    @property
    def costs(self) -> np.ndarray:
        return np.array([e.cost for e in self.edges], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([d.value for d in self.demands], dtype=float)

    def out_edges(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.node_count)]
        for e in self.edges:
            out[e.tail].append(e.id)
        return out

    def with_capacities(self, capacities: Sequence[float]) -> Instance:
        edges = tuple(replace(e, capacity=float(c)) for e, c in zip(self.edges, capacities))
        return replace(self, edges=edges)


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(instance: Instance) -> ValidationResult:
    """Collect every invariant violation; never raises."""
    out: list[str] = []
    n = instance.node_count
    if n < 1:
        out.append(f"node_count must be >= 1, got {n}")
    if instance.m < 1:
        out.append("instance needs at least one edge")
    if instance.k < 1:
        out.append("instance needs at least one demand")
    for j, e in enumerate(instance.edges):
        if e.id != j:
            out.append(f"edge {j}: id {e.id} is not its position")
        if not (0 <= e.tail < n and 0 <= e.head < n):
            out.append(f"edge {j}: endpoint out of range [0, {n})")
        if e.tail == e.head:
            out.append(f"edge {j}: self-loop on node {e.tail}")
        if not (e.capacity > 0) or not np.isfinite(e.capacity):
            out.append(f"edge {j}: capacity must be > 0 (got {e.capacity})")
        if not (e.cost > 0) or not np.isfinite(e.cost):
            out.append(f"edge {j}: cost must be > 0 (got {e.cost})")
    for i, d in enumerate(instance.demands):
        if d.id != i:
            out.append(f"demand {i}: id {d.id} is not its position")
        if not (0 <= d.source < n and 0 <= d.target < n):
            out.append(f"demand {i}: terminal out of range [0, {n})")
        if d.source == d.target:
            out.append(f"demand {i}: source equals target")
        if not (d.value > 0) or not np.isfinite(d.value):
            out.append(f"demand {i}: value must be > 0 (got {d.value})")
        elif d.value > 1:
            out.append(f"demand {i}: demand exceeds 1 (run normalize), got {d.value}")
    return ValidationResult(tuple(out))


def normalize(instance: Instance) -> tuple[Instance, float]:
    """Scale demands and capacities jointly so the largest demand is 1.

    Returns the scaled instance and the divisor. Instances whose demands are
    already at most 1 come back unchanged with a scale of 1.0.
    """
    if any(not (d.value > 0) for d in instance.demands):
        raise InvalidInstance("demand values must be positive")
    if any(not (e.capacity > 0) for e in instance.edges):
        raise InvalidInstance("capacities must be positive")
    if not instance.demands:
        return instance, 1.0
    scale = max(d.value for d in instance.demands)
    if scale <= 1.0:
        return instance, 1.0
    edges = tuple(replace(e, capacity=e.capacity / scale) for e in instance.edges)
    demands = tuple(replace(d, value=d.value / scale) for d in instance.demands)
    return Instance(instance.node_count, edges, demands), scale


def reachable_from(instance: Instance, source: int) -> set[int]:
    out = instance.out_edges()
    seen = {source}
    stack = [source]
    while stack:
        v = stack.pop()
        for j in out[v]:
            w = instance.edges[j].head
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def generate_random(
    nodes: int,
    edge_prob: float,
    capacity_range: tuple[float, float],
    k: int,
    demand_range: tuple[float, float],
    seed: int,
    cost_range: tuple[float, float] = (1.0, 10.0),
    max_redraws: int = 100,
) -> Instance:
    """Random Erdős–Rényi digraph with demands between mutually reachable pairs.

    Each ordered pair ``(u, v)``, ``u != v``, becomes an edge with probability
    ``edge_prob``. Capacities, costs and demand values are uniform over their
    ranges. The graph is redrawn (up to ``max_redraws`` times) until some
    ordered pair is connected.
    """
    if nodes < 2:
        raise ValueError("need at least 2 nodes")
    if not 0 < edge_prob <= 1:
        raise ValueError("edge_prob must lie in (0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    lo_c, hi_c = capacity_range
    lo_d, hi_d = demand_range
    if not (0 < lo_c <= hi_c):
        raise ValueError(f"bad capacity range {capacity_range}")
    if not (0 < lo_d <= hi_d <= 1):
        raise ValueError(f"demand range must be a sub-interval of (0, 1], got {demand_range}")
    if not (0 < cost_range[0] <= cost_range[1]):
        raise ValueError(f"bad cost range {cost_range}")

    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    for _ in range(max_redraws):
        pairs = [(u, v) for u in range(nodes) for v in range(nodes) if u != v]
        mask = rng.random(len(pairs)) < edge_prob
        arcs = [p for p, keep in zip(pairs, mask) if keep]
        if not arcs:
            continue
        caps = rng.uniform(lo_c, hi_c, len(arcs))
        costs = rng.uniform(cost_range[0], cost_range[1], len(arcs))
        skeleton = Instance.build(nodes, [(u, v, 1.0, 1.0) for u, v in arcs], [])
        connected = [
            (s, t) for s in range(nodes) for t in sorted(reachable_from(skeleton, s)) if t != s
        ]
        if not connected:
            continue
        picks = rng.integers(0, len(connected), k)
        values = rng.uniform(lo_d, hi_d, k)
        return Instance.build(
            nodes,
            [(u, v, float(c), float(w)) for (u, v), c, w in zip(arcs, caps, costs)],
            [(*connected[p], float(val)) for p, val in zip(picks, values)],
        )
    raise GenerationFailed(f"no connected terminal pair after {max_redraws} redraws")


def to_dict(instance: Instance) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "nodes": instance.node_count,
        "edges": [
            {"from": e.tail, "to": e.head, "capacity": e.capacity, "cost": e.cost}
            for e in instance.edges
        ],
        "demands": [
            {"source": d.source, "target": d.target, "value": d.value} for d in instance.demands
        ],
    }


def _get(obj: dict, key: str, where: str, kind: type | tuple[type, ...]):
    if not isinstance(obj, dict):
        raise ParseError("expected an object", field=where)
    if key not in obj:
        raise ParseError(f"missing field {key!r}", field=f"{where}.{key}" if where else key)
    val = obj[key]
    # bool is an int subclass; reject it explicitly
    if isinstance(val, bool) or not isinstance(val, kind):
        raise ParseError(
            f"wrong type for {key!r}: {type(val).__name__}",
            field=f"{where}.{key}" if where else key,
        )
    return val


def from_dict(data: dict) -> Instance:
    """Decode the JSON document form. Unknown keys are ignored."""
    version = _get(data, "version", "", int)
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"unsupported schema version {version} (expected {SCHEMA_VERSION})", field="version"
        )
    nodes = _get(data, "nodes", "", int)
    raw_edges = _get(data, "edges", "", list)
    raw_demands = _get(data, "demands", "", list)
    num = (int, float)
    edges = []
    for j, e in enumerate(raw_edges):
        where = f"edges[{j}]"
        edges.append((
            _get(e, "from", where, int),
            _get(e, "to", where, int),
            _get(e, "capacity", where, num),
            _get(e, "cost", where, num),
        ))
    demands = []
    for i, d in enumerate(raw_demands):
        where = f"demands[{i}]"
        demands.append((
            _get(d, "source", where, int),
            _get(d, "target", where, int),
            _get(d, "value", where, num),
        ))
    return Instance.build(nodes, edges, demands)


def read_instance(path: str | os.PathLike) -> Instance:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return from_dict(data)


def write_instance(instance: Instance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_dict(instance), fh, indent=2)
        fh.write("\n")
