from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from safeflow import margin, oracle, rounding
from safeflow.instance import Instance, generate_random
from safeflow.mcmf import FlowSolution

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def single_edge() -> Instance:
    return Instance.build(2, [(0, 1, 1.0, 1.0)], [(0, 1, 1.0)])


@pytest.fixture
def diamond() -> Instance:
    # 0 -> {1, 2} -> 3; edges 0:(0,1) 1:(1,3) 2:(0,2) 3:(2,3)
    return Instance.build(
        4,
        [(0, 1, 50.0, 1.0), (1, 3, 50.0, 1.0), (0, 2, 50.0, 1.0), (2, 3, 50.0, 1.0)],
        [(0, 3, 1.0)],
    )


@pytest.fixture
def diamond_flow() -> FlowSolution:
    return FlowSolution(np.array([[0.3, 0.3, 0.7, 0.7]]), 2.0)


@dataclass
class CorpusEntry:
    seed: int
    instance: Instance  # normalized
    safety: margin.SafetyParams
    verdict: oracle.OracleVerdict


def build_corpus(size: int, base_seed: int = 1000) -> tuple[list[CorpusEntry], int]:
    """Random small instances (n <= 8, k <= 4) with an oracle verdict each.

    Seeds whose margins are undefined or whose path enumeration is too large
    for the oracle are skipped. Returns ``(entries, seeds_tried)``.
    """
    entries = []
    seed = base_seed
    while len(entries) < size:
        seed += 1
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 9))
        k = int(rng.integers(1, 5))
        p = float(rng.uniform(0.25, 0.45))
        inst = generate_random(n, p, (11.0, 18.0), k, (0.2, 1.0), seed)
        try:
            norm, _, safety = rounding.prepare(inst)
            verdict = oracle.exact_feasibility(norm, safety.shrunk_capacity, max_product=10**5)
        except (margin.CapacityTooSmall, oracle.OracleTooLarge):
            continue
        entries.append(CorpusEntry(seed, norm, safety, verdict))
    return entries, seed - base_seed


@pytest.fixture(scope="session")
def corpus() -> list[CorpusEntry]:
    entries, _ = build_corpus(360)
    return entries


@pytest.fixture(scope="session")
def safe_corpus(corpus) -> list[CorpusEntry]:
    return [c for c in corpus if c.verdict.safe_exists]
