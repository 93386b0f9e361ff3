import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from safeflow.instance import (
    GenerationFailed,
    Instance,
    InvalidInstance,
    ParseError,
    SchemaVersionError,
    generate_random,
    normalize,
    read_instance,
    to_dict,
    validate,
    write_instance,
)
from safeflow.rounding import PathSystem, check_feasible


def test_minimal_instance_is_valid(single_edge):
    assert validate(single_edge).ok


def test_zero_capacity_violation():
    inst = Instance.build(2, [(0, 1, 0.0, 1.0)], [(0, 1, 1.0)])
    res = validate(inst)
    assert not res.ok
    assert any("capacity must be > 0" in v for v in res.violations)


def test_demand_above_one_violation():
    inst = Instance.build(2, [(0, 1, 5.0, 1.0)], [(0, 1, 1.5)])
    res = validate(inst)
    assert any("demand exceeds 1 (run normalize)" in v for v in res.violations)


@pytest.mark.parametrize(
    "edges, demands, needle",
    [
        ([(0, 0, 1.0, 1.0)], [(0, 1, 1.0)], "self-loop"),
        ([(0, 1, 1.0, 0.0)], [(0, 1, 1.0)], "cost must be > 0"),
        ([(0, 5, 1.0, 1.0)], [(0, 1, 1.0)], "endpoint out of range"),
        ([(0, 1, 1.0, 1.0)], [(1, 1, 1.0)], "source equals target"),
        ([], [(0, 1, 1.0)], "at least one edge"),
    ],
)
def test_violations(edges, demands, needle):
    res = validate(Instance.build(2, edges, demands))
    assert any(needle in v for v in res.violations), res.violations


def test_parallel_edges_allowed():
    inst = Instance.build(2, [(0, 1, 1.0, 1.0), (0, 1, 2.0, 3.0)], [(0, 1, 1.0)])
    assert validate(inst).ok


def test_normalize_divides_both():
    inst = Instance.build(3, [(0, 1, 10.0, 1.0), (1, 2, 20.0, 1.0)], [(0, 1, 2.0), (1, 2, 4.0)])
    out, scale = normalize(inst)
    assert scale == 4.0
    assert [d.value for d in out.demands] == [0.5, 1.0]
    assert [e.capacity for e in out.edges] == [2.5, 5.0]


def test_normalize_noop_when_already_normalized():
    inst = Instance.build(3, [(0, 1, 10.0, 1.0), (1, 2, 20.0, 1.0)], [(0, 1, 0.3), (1, 2, 1.0)])
    out, scale = normalize(inst)
    assert scale == 1.0
    assert out == inst


def test_normalize_single_saturated():
    inst = Instance.build(2, [(0, 1, 5.0, 1.0)], [(0, 1, 5.0)])
    out, scale = normalize(inst)
    assert scale == 5.0
    assert out.demands[0].value == 1.0 and out.edges[0].capacity == 1.0


def test_normalize_rejects_nonpositive():
    inst = Instance.build(2, [(0, 1, 5.0, 1.0)], [(0, 1, -1.0)])
    with pytest.raises(InvalidInstance):
        normalize(inst)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.5, 20.0))
def test_normalize_idempotent(seed, dscale):
    inst = generate_random(5, 0.5, (1.0, 10.0), 3, (0.1, 1.0), seed)
    scaled = Instance.build(
        inst.node_count,
        [(e.tail, e.head, e.capacity * dscale, e.cost) for e in inst.edges],
        [(d.source, d.target, d.value * dscale) for d in inst.demands],
    )
    once, _ = normalize(scaled)
    twice, s2 = normalize(once)
    assert s2 == 1.0
    assert twice == once


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32), st.floats(0.01, 100.0))
def test_feasibility_invariant_under_joint_scaling(seed, s):
    inst = generate_random(5, 0.6, (0.5, 2.0), 3, (0.2, 1.0), seed)
    rng = np.random.default_rng(seed)
    out = inst.out_edges()
    # random walks along any edges give some (not necessarily simple) path system
    edge_paths = []
    for d in inst.demands:
        v, path = d.source, []
        for _ in range(inst.node_count):
            if v == d.target or not out[v]:
                break
            j = out[v][rng.integers(len(out[v]))]
            path.append(j)
            v = inst.edges[j].head
        edge_paths.append(tuple(path))
    ps = PathSystem((), tuple(edge_paths), (), False)
    scaled = Instance.build(
        inst.node_count,
        [(e.tail, e.head, e.capacity / s, e.cost) for e in inst.edges],
        [(d.source, d.target, d.value / s) for d in inst.demands],
    )
    a = check_feasible(ps, inst)
    b = check_feasible(ps, scaled)
    # equal unless a load sits within rounding of its capacity
    loads = np.zeros(inst.m)
    for d, p in zip(inst.demands, edge_paths):
        for j in p:
            loads[j] += d.value
    if np.all(np.abs(loads - inst.capacities) > 1e-9 * np.maximum(1, inst.capacities)):
        assert a == b


def test_complete_digraph_edge_count():
    inst = generate_random(4, 1.0, (1.0, 2.0), 2, (0.1, 1.0), 5)
    assert inst.m == 12


def test_generate_deterministic():
    a = generate_random(6, 0.4, (1.0, 2.0), 3, (0.1, 1.0), 99)
    b = generate_random(6, 0.4, (1.0, 2.0), 3, (0.1, 1.0), 99)
    assert a == b


def test_generated_instance_validates():
    inst = generate_random(6, 0.5, (1.0, 2.0), 3, (0.1, 1.0), 7)
    assert validate(inst).ok
    assert inst.k == 3


def test_generate_failed_when_no_edges_possible():
    with pytest.raises(GenerationFailed):
        generate_random(2, 1e-12, (1.0, 2.0), 1, (0.1, 1.0), 0, max_redraws=3)


def test_round_trip(tmp_path, single_edge):
    path = tmp_path / "i.json"
    write_instance(single_edge, path)
    assert read_instance(path) == single_edge


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_bit_exact(tmp_path_factory, seed):
    inst = generate_random(6, 0.5, (0.1, 1e6), 4, (1e-9, 1.0), seed)
    path = tmp_path_factory.mktemp("rt") / "i.json"
    write_instance(inst, path)
    back = read_instance(path)
    assert back == inst
    for a, b in zip(inst.edges, back.edges):
        assert math.copysign(1, a.capacity) == math.copysign(1, b.capacity)
        assert a.capacity.hex() == b.capacity.hex() and a.cost.hex() == b.cost.hex()


def test_missing_edges_field(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"version": 1, "nodes": 2, "demands": []}))
    with pytest.raises(ParseError) as info:
        read_instance(path)
    assert info.value.field == "edges"
    assert "edges" in str(info.value)


def test_wrong_field_type_names_path(tmp_path, single_edge):
    data = to_dict(single_edge)
    data["edges"][0]["capacity"] = "big"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ParseError) as info:
        read_instance(path)
    assert info.value.field == "edges[0].capacity"


def test_syntax_error_has_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "version": 1,\n  "nodes": 2,\n  oops\n}')
    with pytest.raises(ParseError) as info:
        read_instance(path)
    assert info.value.line == 4


def test_version_mismatch(tmp_path, single_edge):
    data = to_dict(single_edge)
    data["version"] = 2
    path = tmp_path / "v2.json"
    path.write_text(json.dumps(data))
    with pytest.raises(SchemaVersionError):
        read_instance(path)


def test_unknown_fields_ignored(tmp_path, single_edge):
    data = to_dict(single_edge)
    data["comment"] = "hello"
    data["edges"][0]["label"] = "backbone"
    path = tmp_path / "x.json"
    path.write_text(json.dumps(data))
    assert read_instance(path) == single_edge
