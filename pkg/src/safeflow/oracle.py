"""Brute-force ground truth for small instances.

Nothing here is used by the solver itself; tests and the ``check --oracle``
command compare solver output against these routines.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import Instance
from .mcmf import TAU_ZERO, FlowSolution

MAX_NODES = 10
MAX_COMMODITIES = 4
MAX_PRODUCT = 10**7
PATH_LIMIT = 10**5


class OracleTooLarge(ValueError):
    pass


class CyclicSupport(ValueError):
    pass


def enumerate_simple_paths(
    instance: Instance, source: int, target: int, limit: int = PATH_LIMIT
) -> tuple[list[tuple[int, ...]], bool]:
    """All simple directed paths ``source -> target`` as edge-id tuples, in DFS
    order (outgoing edges by id). Returns ``(paths, truncated)``."""
    if source == target:
        raise ValueError("source equals target")
    out = instance.out_edges()
    paths: list[tuple[int, ...]] = []
    on_path = {source}
    edges: list[int] = []

    def dfs(v: int) -> bool:
        for j in out[v]:
            w = instance.edges[j].head
            if w in on_path:
                continue
            edges.append(j)
            if w == target:
                paths.append(tuple(edges))
                if len(paths) >= limit:
                    edges.pop()
                    return True
            else:
                on_path.add(w)
                stop = dfs(w)
                on_path.discard(w)
                if stop:
                    edges.pop()
                    return True
            edges.pop()
        return False

    truncated = dfs(source)
    return paths, truncated


@dataclass(frozen=True)
class OracleVerdict:
    feasible_exists: bool
    safe_exists: bool
    witness: tuple[tuple[int, ...], ...] | None  # edge ids per commodity
    paths_enumerated: int

    def to_dict(self, instance: Instance | None = None) -> dict:
        out = {
            "feasible_exists": self.feasible_exists,
            "safe_exists": self.safe_exists,
            "paths_enumerated": self.paths_enumerated,
            "witness": None if self.witness is None else [list(p) for p in self.witness],
        }
        if instance is not None and self.witness is not None:
            out["witness_nodes"] = [
                [d.source] + [instance.edges[j].head for j in p]
                for d, p in zip(instance.demands, self.witness)
            ]
        return out


def candidate_paths(
    instance: Instance,
    max_nodes: int = MAX_NODES,
    max_commodities: int = MAX_COMMODITIES,
    max_product: int = MAX_PRODUCT,
) -> list[list[tuple[int, ...]]]:
    if instance.node_count > max_nodes or instance.k > max_commodities:
        raise OracleTooLarge(
            f"oracle limited to n <= {max_nodes}, k <= {max_commodities} "
            f"(got n={instance.node_count}, k={instance.k})"
        )
    per = []
    for d in instance.demands:
        paths, truncated = enumerate_simple_paths(instance, d.source, d.target)
        if truncated:
            raise OracleTooLarge(f"commodity {d.id}: more than {PATH_LIMIT} paths")
        per.append(paths)
    if math.prod(len(p) for p in per) > max_product:
        raise OracleTooLarge("path-assignment product exceeds guard")
    return per


def search(
    instance: Instance, per: Sequence[Sequence[tuple[int, ...]]], capacities: Sequence[float]
) -> tuple[tuple[int, ...], ...] | None:
    """Backtracking over one path per commodity with residual-capacity pruning."""
    residual = [float(c) for c in capacities]
    # largest demands first prune earliest
    order = sorted(range(instance.k), key=lambda i: (-instance.demands[i].value, i))
    chosen: dict[int, tuple[int, ...]] = {}

    def place(pos: int) -> bool:
        if pos == len(order):
            return True
        i = order[pos]
        v = instance.demands[i].value
        for path in per[i]:
            if all(residual[j] + 1e-12 >= v for j in path):
                for j in path:
                    residual[j] -= v
                chosen[i] = path
                if place(pos + 1):
                    return True
                for j in path:
                    residual[j] += v
        return False

    if not place(0):
        return None
    return tuple(chosen[i] for i in range(instance.k))


def naive_search(
    instance: Instance, per: Sequence[Sequence[tuple[int, ...]]], capacities: Sequence[float]
) -> bool:
    """Plain scan of the full product of path choices (cross-check for ``search``)."""
    values = [d.value for d in instance.demands]
    for combo in itertools.product(*per):
        load = [0.0] * instance.m
        for v, path in zip(values, combo):
            for j in path:
                load[j] += v
        if all(l <= c + 1e-12 for l, c in zip(load, capacities)):
            return True
    return False


def exact_feasibility(
    instance: Instance, shrunk_capacities: Sequence[float], **guards
) -> OracleVerdict:
    """Decide feasibility under the instance's capacities and under ``shrunk_capacities``."""
    per = candidate_paths(instance, **guards)
    count = sum(len(p) for p in per)
    feasible = search(instance, per, [e.capacity for e in instance.edges])
    safe = search(instance, per, shrunk_capacities) if feasible is not None else None
    return OracleVerdict(
        feasible_exists=feasible is not None,
        safe_exists=safe is not None,
        witness=safe if safe is not None else feasible,
        paths_enumerated=count,
    )


def exact_walk_distribution(flow: FlowSolution, instance: Instance, commodity: int) -> np.ndarray:
    """Probability that each edge lies on the flow-proportional walk."""
    d = instance.demands[commodity]
    x = flow.flow[commodity]
    support = [j for j in range(instance.m) if x[j] > TAU_ZERO * d.value]
    out: dict[int, list[int]] = {}
    indeg = [0] * instance.node_count
    for j in support:
        e = instance.edges[j]
        out.setdefault(e.tail, []).append(j)
        indeg[e.head] += 1
    queue = [v for v in range(instance.node_count) if indeg[v] == 0]
    order = []
    while queue:
        v = queue.pop()
        order.append(v)
        for j in out.get(v, ()):
            w = instance.edges[j].head
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    if len(order) != instance.node_count:
        raise CyclicSupport(f"commodity {commodity}: support contains a cycle")
    visit = np.zeros(instance.node_count)
    visit[d.source] = 1.0
    prob = np.zeros(instance.m)
    for v in order:
        if v == d.target or visit[v] == 0.0:
            continue
        outs = out.get(v, [])
        total = sum(x[j] for j in outs)
        for j in outs:
            p = visit[v] * x[j] / total
            prob[j] += p
            visit[instance.edges[j].head] += p
    return prob


def min_cost_flow(
    node_count: int,
    arcs: Sequence[tuple[int, int, float, float]],
    source: int,
    target: int,
    value: float,
) -> tuple[float, np.ndarray] | None:
    """Successive shortest paths with Bellman-Ford on the residual graph.

    ``arcs`` are ``(tail, head, capacity, cost)``. Returns ``(cost, flow)`` for
    a minimum-cost flow of ``value`` from ``source`` to ``target``, or None if
    the capacities cannot carry it.
    """
    m = len(arcs)
    flow = np.zeros(m)
    remaining = value
    eps = 1e-12
    while remaining > eps * max(1.0, value):
        dist = [math.inf] * node_count
        via: list[tuple[int, int] | None] = [None] * node_count  # (arc, +1 fwd / -1 bwd)
        dist[source] = 0.0
        for _ in range(node_count - 1):
            changed = False
            for a, (u, v, cap, cost) in enumerate(arcs):
                if flow[a] < cap - eps and dist[u] + cost < dist[v] - 1e-15:
                    dist[v] = dist[u] + cost
                    via[v] = (a, 1)
                    changed = True
                if flow[a] > eps and dist[v] - cost < dist[u] - 1e-15:
                    dist[u] = dist[v] - cost
                    via[u] = (a, -1)
                    changed = True
            if not changed:
                break
        if dist[target] == math.inf:
            return None
        push = remaining
        v = target
        steps = []
        while v != source:
            a, sgn = via[v]
            u, w, cap, _ = arcs[a]
            push = min(push, cap - flow[a] if sgn > 0 else flow[a])
            steps.append((a, sgn))
            v = u if sgn > 0 else w
        for a, sgn in steps:
            flow[a] += sgn * push
        remaining -= push
    return float(sum(f * a[3] for f, a in zip(flow, arcs))), flow
