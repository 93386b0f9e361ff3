"""Randomized rounding of the relaxation into one path per commodity, and
the repeated-trial driver."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import margin, mcmf
from .instance import Instance, InvalidInstance, normalize, validate
from .mcmf import TAU_ZERO, FlowSolution, NoSafeSolution

TAU_CHECK = 1e-12
REPORT_SCHEMA = "safeflow.report/1"

FOUND = "found"
NO_SAFE_SOLUTION = "no_safe_solution"
NOT_FOUND = "not_found"
MESSAGES = {
    FOUND: "feasible path system found",
    NO_SAFE_SOLUTION: "no safe solution exists",
    NOT_FOUND: "no solution is found",
}


class WalkError(RuntimeError):
    pass


class DeadEnd(WalkError):
    def __init__(self, node: int):
        self.node = node
        super().__init__(f"walk stuck at node {node}: no outgoing support")


def substream(seed: int, trial: int, commodity: int) -> np.random.Generator:
    """Independent generator keyed by ``(seed, trial, commodity)``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(trial), int(commodity)])
    return np.random.Generator(np.random.PCG64(ss))


def walk_edges(
    flow: FlowSolution,
    instance: Instance,
    commodity: int,
    rng: np.random.Generator,
    out_edges: list[list[int]] | None = None,
) -> list[int]:
    """Random walk from source to target; returns the edge ids taken.

    At each node the next edge is drawn among outgoing support edges with
    probability proportional to the commodity's flow on it.
    """
    d = instance.demands[commodity]
    if out_edges is None:
        out_edges = instance.out_edges()
    x = flow.flow[commodity]
    thresh = TAU_ZERO * d.value
    v = d.source
    taken: list[int] = []
    seen = {v}
    while v != d.target:
        opts = [j for j in out_edges[v] if x[j] > thresh]
        if not opts:
            raise DeadEnd(v)
        weights = np.array([x[j] for j in opts])
        u = rng.random() * weights.sum()
        pick = int(np.searchsorted(np.cumsum(weights), u, side="right"))
        j = opts[min(pick, len(opts) - 1)]
        taken.append(j)
        v = instance.edges[j].head
        if v in seen:
            raise WalkError(f"walk revisited node {v}; commodity support is cyclic")
        seen.add(v)
    return taken


def edges_to_nodes(instance: Instance, source: int, edge_ids: Sequence[int]) -> list[int]:
    nodes = [source]
    for j in edge_ids:
        nodes.append(instance.edges[j].head)
    return nodes


def walk_one(
    flow: FlowSolution, instance: Instance, commodity: int, rng: np.random.Generator
) -> list[int]:
    """Node sequence of one flow-proportional walk for ``commodity``."""
    src = instance.demands[commodity].source
    return edges_to_nodes(instance, src, walk_edges(flow, instance, commodity, rng))


@dataclass(frozen=True)
class PathSystem:
    paths: tuple[tuple[int, ...], ...]  # node sequences
    edges: tuple[tuple[int, ...], ...]  # edge ids along each path
    edge_load: tuple[float, ...]
    feasible: bool


def path_loads(edge_paths: Sequence[Sequence[int]], instance: Instance) -> np.ndarray:
    load = np.zeros(instance.m)
    for d, path in zip(instance.demands, edge_paths):
        for j in path:
            load[j] += d.value
    return load


def round_paths(
    flow: FlowSolution,
    instance: Instance,
    rng: np.random.Generator | Sequence[np.random.Generator],
) -> PathSystem:
    """One path per commodity. ``rng`` is either a single generator shared in
    commodity order or one generator per commodity."""
    out = instance.out_edges()
    edge_paths = []
    for d in instance.demands:
        g = rng if isinstance(rng, np.random.Generator) else rng[d.id]
        edge_paths.append(tuple(walk_edges(flow, instance, d.id, g, out)))
    load = path_loads(edge_paths, instance)
    ok = bool((load <= instance.capacities + TAU_CHECK).all())
    nodes = tuple(
        tuple(edges_to_nodes(instance, d.source, p)) for d, p in zip(instance.demands, edge_paths)
    )
    return PathSystem(nodes, tuple(edge_paths), tuple(float(v) for v in load), ok)


def check_feasible(paths: PathSystem, instance: Instance) -> bool:
    """Recompute per-edge loads from the paths and compare to capacities."""
    load = [0.0] * instance.m
    for d, path in zip(instance.demands, paths.edges):
        for j in path:
            load[j] += d.value
    return all(l <= e.capacity + TAU_CHECK for l, e in zip(load, instance.edges))


@dataclass(frozen=True)
class DriverConfig:
    r: int = 20
    seed: int = 0
    rho_floor: float = 0.0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be >= 1")


@dataclass(frozen=True, eq=False)
class RoundingReport:
    verdict: str
    trial: int | None  # 1-based index of the successful trial
    trials_run: int
    per_trial_feasible: tuple[bool, ...]
    theorem_bound: float
    instance: Instance  # normalized
    scale: float
    safety: margin.SafetyParams
    flow: FlowSolution | None
    paths: PathSystem | None
    union_bound: float | None
    config: DriverConfig

    @property
    def found(self) -> bool:
        return self.verdict == FOUND

    def to_dict(self) -> dict:
        caps = [e.capacity for e in self.instance.edges]
        agg = None if self.flow is None else [float(v) for v in self.flow.aggregate]
        load = None if self.paths is None else list(self.paths.edge_load)
        table = []
        for j, c in enumerate(caps):
            table.append({
                "edge": j,
                "capacity": c,
                "rho": self.safety.rho[j],
                "shrunk_capacity": self.safety.shrunk_capacity[j],
                "flow": None if agg is None else agg[j],
                "load": None if load is None else load[j],
            })
        return {
            "schema": REPORT_SCHEMA,
            "verdict": self.verdict,
            "trial": self.trial,
            "trials_run": self.trials_run,
            "per_trial_feasible": list(self.per_trial_feasible),
            "theorem_bound": self.theorem_bound,
            "union_bound": self.union_bound,
            "scale": self.scale,
            "r": self.config.r,
            "seed": self.config.seed,
            "rho_floor": self.config.rho_floor,
            # the relaxation is deterministic, so it is solved once and only
            # the rounding step is repeated across trials
            "lp_solves": 1,
            "message": MESSAGES[self.verdict],
            "total_cost": None if self.flow is None else self.flow.total_cost,
            "paths": None if self.paths is None else [list(p) for p in self.paths.paths],
            "path_edges": None if self.paths is None else [list(p) for p in self.paths.edges],
            "edges": table,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def prepare(instance: Instance, rho_floor: float = 0.0):
    """Normalize, validate and compute margins. Returns ``(instance, scale, safety)``."""
    norm, scale = normalize(instance)
    check = validate(norm)
    if not check.ok:
        raise InvalidInstance("; ".join(check.violations))
    return norm, scale, margin.safety_params(norm, rho_floor)


def run_trial(flow: FlowSolution, instance: Instance, seed: int, trial: int) -> PathSystem | None:
    """One rounding trial on independent substreams; None if a walk aborts."""
    rngs = [substream(seed, trial, i) for i in range(instance.k)]
    try:
        return round_paths(flow, instance, rngs)
    except WalkError:
        return None


def solve(instance: Instance, config: DriverConfig = DriverConfig()) -> RoundingReport:
    """Margins, relaxation, then up to ``config.r`` rounding trials.

    Raises CapacityTooSmall and IterationLimit; an infeasible relaxation is
    reported as a ``no_safe_solution`` verdict with zero trials.
    """
    norm, scale, safety = prepare(instance, config.rho_floor)
    bound = margin.failure_bound(config.r)
    common = dict(theorem_bound=bound, instance=norm, scale=scale, safety=safety, config=config)
    try:
        flow = mcmf.relax(norm, safety)
    except NoSafeSolution:
        return RoundingReport(
            verdict=NO_SAFE_SOLUTION, trial=None, trials_run=0, per_trial_feasible=(),
            flow=None, paths=None, union_bound=None, **common,
        )
    ub = margin.union_bound(norm.capacities, flow.aggregate)
    outcomes: list[bool] = []
    last = None
    for t in range(1, config.r + 1):
        ps = run_trial(flow, norm, config.seed, t)
        ok = ps is not None and check_feasible(ps, norm)
        outcomes.append(ok)
        if ps is not None:
            last = ps
        if ok:
            return RoundingReport(
                verdict=FOUND, trial=t, trials_run=t, per_trial_feasible=tuple(outcomes),
                flow=flow, paths=ps, union_bound=ub, **common,
            )
    return RoundingReport(
        verdict=NOT_FOUND, trial=None, trials_run=config.r, per_trial_feasible=tuple(outcomes),
        flow=flow, paths=last, union_bound=ub, **common,
    )


@dataclass(frozen=True, eq=False)
class LoadStats:
    flow: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    max: np.ndarray
    roundings: int


def sample_loads(flow: FlowSolution, instance: Instance, roundings: int, seed: int) -> LoadStats:
    """Per-edge statistics of the rounded load over ``roundings`` independent roundings."""
    loads = np.empty((roundings, instance.m))
    for t in range(roundings):
        ps = run_trial(flow, instance, seed, t + 1)
        if ps is None:
            raise WalkError(f"rounding {t + 1} aborted")
        loads[t] = ps.edge_load
    # fsum keeps constant columns exact
    mean = np.array([math.fsum(col) for col in loads.T]) / roundings
    if roundings > 1:
        std = np.sqrt(((loads - mean) ** 2).sum(axis=0) / (roundings - 1))
    else:
        std = np.zeros(instance.m)
    return LoadStats(np.array(flow.aggregate), mean, std, loads.max(axis=0), roundings)
