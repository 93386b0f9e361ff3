"""Minimum-cost multicommodity flow relaxation on shrunk capacities."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import simplex
from .instance import Instance
from .margin import SafetyParams

TAU_LP = simplex.TOL_LP
TAU_FEAS = simplex.TOL_FEAS
TAU_ZERO = 1e-9


class Infeasible(RuntimeError):
    pass


class NoSafeSolution(Infeasible):
    def __init__(self, message: str = "no safe solution exists"):
        super().__init__(message)


IterationLimit = simplex.IterationLimit


@dataclass(frozen=True, eq=False)
class FlowSolution:
    flow: np.ndarray  # (k, m): flow of commodity i on edge j
    total_cost: float
    aggregate: np.ndarray = field(init=False)

    def __post_init__(self):
        self.flow.setflags(write=False)
        agg = self.flow.sum(axis=0)
        agg.setflags(write=False)
        object.__setattr__(self, "aggregate", agg)

    @property
    def k(self) -> int:
        return self.flow.shape[0]

    @property
    def m(self) -> int:
        return self.flow.shape[1]

    def support(self, commodity: int, value: float) -> np.ndarray:
        """Edge ids carrying more than ``TAU_ZERO * value`` of ``commodity``."""
        return np.flatnonzero(self.flow[commodity] > TAU_ZERO * value)


@dataclass(frozen=True, eq=False)
class LpModel:
    """Edge formulation; variable ``i * m + j`` is commodity ``i`` on edge ``j``."""

    k: int
    m: int
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    eq_rows: tuple[tuple[int, int], ...]  # (commodity, node)

    @property
    def num_vars(self) -> int:
        return self.k * self.m

    def var(self, commodity: int, edge: int) -> int:
        return commodity * self.m + edge


def build_lp(instance: Instance, safety: SafetyParams) -> LpModel:
    n, m, k = instance.node_count, instance.m, instance.k
    cost = instance.costs
    c = np.tile(cost, k)
    eq_rows = []
    A_eq = []
    b_eq = []
    for d in instance.demands:
        # the target row is implied by the others
        for v in range(n):
            if v == d.target:
                continue
            row = np.zeros(k * m)
            for e in instance.edges:
                if e.tail == v:
                    row[d.id * m + e.id] += 1.0
                if e.head == v:
                    row[d.id * m + e.id] -= 1.0
            A_eq.append(row)
            b_eq.append(d.value if v == d.source else 0.0)
            eq_rows.append((d.id, v))
    A_ub = np.zeros((m, k * m))
    for j in range(m):
        A_ub[j, j::m] = 1.0
    return LpModel(
        k=k,
        m=m,
        c=c,
        A_eq=np.array(A_eq).reshape(-1, k * m),
        b_eq=np.array(b_eq),
        A_ub=A_ub,
        b_ub=safety.shrunk.copy(),
        eq_rows=tuple(eq_rows),
    )


def solve_lp(model: LpModel, values=None) -> FlowSolution:
    """Optimal basic solution of ``model``.

    Raises Infeasible when the demands do not fit, IterationLimit when the
    pivot budget runs out. ``values`` (per-commodity demands) sets the
    relative threshold below which LP round-off is cleared to zero.
    """
    res = simplex.solve(model.c, model.A_eq, model.b_eq, model.A_ub, model.b_ub)
    if res.status == "infeasible":
        raise Infeasible("multicommodity flow relaxation is infeasible")
    if res.status != "optimal":
        raise RuntimeError(f"unexpected LP status {res.status}")
    flow = res.x.reshape(model.k, model.m).copy()
    if values is not None:
        thresh = TAU_ZERO * np.asarray(values, dtype=float)[:, None]
        flow[flow <= thresh] = 0.0
    return FlowSolution(flow, float(model.c @ flow.ravel()))


def find_cycle(instance: Instance, edge_ids) -> list[int] | None:
    """A directed cycle (as edge ids) in the subgraph on ``edge_ids``, or None."""
    out: dict[int, list[int]] = {}
    for j in edge_ids:
        out.setdefault(instance.edges[j].tail, []).append(int(j))
    color: dict[int, int] = {}
    via: dict[int, int] = {}
    for root in sorted(out):
        if color.get(root):
            continue
        color[root] = 1
        stack = [(root, iter(out.get(root, ())))]
        while stack:
            v, it = stack[-1]
            for j in it:
                w = instance.edges[j].head
                state = color.get(w, 0)
                if state == 0:
                    color[w] = 1
                    via[w] = j
                    stack.append((w, iter(out.get(w, ()))))
                    break
                if state == 1:
                    cycle = [j]
                    u = v
                    while u != w:
                        cycle.append(via[u])
                        u = instance.edges[via[u]].tail
                    cycle.reverse()
                    return cycle
            else:
                color[v] = 2
                stack.pop()
    return None


def cancel_cycles(flow: FlowSolution, instance: Instance) -> FlowSolution:
    """Strip positive-flow cycles from every commodity's support."""
    x = np.array(flow.flow, dtype=float)
    changed = False
    for d in instance.demands:
        row = x[d.id]
        while True:
            support = np.flatnonzero(row > TAU_ZERO * d.value)
            cycle = find_cycle(instance, support)
            if cycle is None:
                break
            amount = min(row[j] for j in cycle)
            for j in cycle:
                row[j] -= amount
            row[min(cycle, key=lambda j: row[j])] = 0.0
            changed = True
    if not changed:
        return flow
    return FlowSolution(x, float(instance.costs @ x.sum(axis=0)))


def relax(instance: Instance, safety: SafetyParams) -> FlowSolution:
    """Solve the relaxation under shrunk capacities and make every commodity acyclic.

    Raises NoSafeSolution when the relaxation is infeasible.
    """
    model = build_lp(instance, safety)
    try:
        sol = solve_lp(model, instance.values)
    except Infeasible as exc:
        raise NoSafeSolution() from exc
    return cancel_cycles(sol, instance)


def flow_violations(
    flow: FlowSolution, instance: Instance, capacities, tol: float = TAU_FEAS
) -> list[str]:
    """Conservation, demand, capacity and acyclicity checks on ``flow``."""
    out = []
    x = flow.flow
    if (x < -tol).any():
        out.append("negative flow")
    for d in instance.demands:
        net = np.zeros(instance.node_count)
        for e in instance.edges:
            net[e.tail] += x[d.id, e.id]
            net[e.head] -= x[d.id, e.id]
        for v in range(instance.node_count):
            want = d.value if v == d.source else -d.value if v == d.target else 0.0
            if abs(net[v] - want) > tol:
                out.append(f"commodity {d.id}: node {v} imbalance {net[v] - want:.3g}")
        if find_cycle(instance, flow.support(d.id, d.value)) is not None:
            out.append(f"commodity {d.id}: support has a cycle")
    for j, cap in enumerate(capacities):
        if flow.aggregate[j] > cap + tol:
            out.append(f"edge {j}: aggregate {flow.aggregate[j]:.9g} exceeds {cap:.9g}")
    return out


def flow_csv(flow: FlowSolution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["commodity", "edge", "flow"])
    for i in range(flow.k):
        for j in range(flow.m):
            if flow.flow[i, j] != 0.0:
                w.writerow([i, j, repr(float(flow.flow[i, j]))])
    for j in range(flow.m):
        w.writerow(["all", j, repr(float(flow.aggregate[j]))])
    return buf.getvalue()
