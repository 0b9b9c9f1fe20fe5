import json

import numpy as np
import pytest

from pfreal.pf_model import (
    PQ,
    PV,
    SLACK,
    Bus,
    Line,
    PowerSystem,
    PowerSystemError,
    bezout_bound,
    build_system,
    complex_bound,
    four_bus,
    from_dict,
    injections,
    line_flows,
    load_system,
    normalize_vm,
    polar_injections,
    polar_point,
    save_system,
    to_dict,
    two_bus,
)
from pfreal.poly import evaluate


def test_variable_count_and_names(table1):
    sys = build_system(table1)
    assert sys.nvars == 6
    assert sys.names == ("vd2", "vq2", "vd3", "vq3", "vd4", "vq4")
    assert sys.total_degree() == 64


def test_susceptance_convention(table1):
    B = table1.susceptance()
    assert B[0, 1] == pytest.approx(1.612)
    assert np.allclose(B.sum(axis=1), 0)
    assert np.allclose(B, B.T)


@pytest.mark.parametrize("seed", range(5))
def test_rectangular_matches_polar(seed):
    rng = np.random.default_rng(seed)
    ps = four_bus(b=tuple(rng.normal(0, 8, 6)), vm=tuple(rng.uniform(0.9, 1.1, 4)))
    theta = np.concatenate([[0.0], rng.uniform(-np.pi, np.pi, 3)])
    x = polar_point(ps, theta)
    P, Q = injections(ps, x)
    Pp, Qp = polar_injections(ps, theta)
    assert np.allclose(P, Pp, atol=1e-12)
    assert np.allclose(Q, Qp, atol=1e-12)
    # the system vanishes at the point when the injections are set to its own P
    ps2 = four_bus(b=[ps.line_b(*ln.pair) for ln in ps.lines], p=tuple(Pp[1:]), vm=tuple(b.vm for b in ps.buses))
    assert np.max(np.abs(evaluate(build_system(ps2), x))) < 1e-12


def test_lossless_balance():
    rng = np.random.default_rng(3)
    ps = four_bus(b=tuple(rng.normal(0, 8, 6)))
    x = rng.normal(size=6)
    P, _ = injections(ps, x)
    assert abs(P.sum()) < 1e-12
    flows = line_flows(ps, x)
    # flow out of bus 1 adds up to its injection
    assert sum(v for (i, k), v in flows.items() if i == 1) == pytest.approx(P[0])


def test_normalize_vm_preserves_angles():
    rng = np.random.default_rng(7)
    vm = (1.05, 0.97, 1.02, 0.95)
    ps = four_bus(b=tuple(rng.normal(0, 8, 6)), vm=vm)
    unit = normalize_vm(ps)
    theta = np.concatenate([[0.0], rng.uniform(-1, 1, 3)])
    assert np.allclose(polar_injections(ps, theta)[0], polar_injections(unit, theta)[0])
    assert all(b.vm == 1.0 for b in unit.buses)


def test_normalize_vm_rejects_pq():
    ps = PowerSystem((Bus(1, SLACK, 1.0), Bus(2, PQ, None, 0.1, 0.05)), (Line(1, 2, 2.0),))
    with pytest.raises(PowerSystemError):
        normalize_vm(ps)


def test_pq_equation_is_reactive_balance():
    ps = PowerSystem((Bus(1, SLACK, 1.0), Bus(2, PQ, None, 0.1, 0.05)), (Line(1, 2, 2.0),))
    sys = build_system(ps)
    x = np.array([0.9, 0.2])
    P, Q = injections(ps, x)
    assert np.allclose(evaluate(sys, x), [P[1] - 0.1, Q[1] - 0.05])


def test_bounds():
    assert [complex_bound(n) for n in (2, 3, 4)] == [2, 6, 20]
    assert [bezout_bound(n) for n in (2, 3, 4)] == [4, 16, 64]
    with pytest.raises(ValueError):
        complex_bound(1)


def test_validation():
    with pytest.raises(PowerSystemError):
        PowerSystem((Bus(1, PV, 1.0), Bus(2, PV, 1.0)), (Line(1, 2, 1.0),))
    with pytest.raises(PowerSystemError):
        PowerSystem((Bus(1, SLACK, 1.0), Bus(2, PV, 1.0)), (Line(1, 2, 1.0), Line(2, 1, 3.0)))
    with pytest.raises(PowerSystemError):
        PowerSystem((Bus(1, SLACK, 1.0), Bus(2, PV, 1.0)), (Line(1, 3, 1.0),))


def test_json_roundtrip(tmp_path, table1):
    path = tmp_path / "t.json"
    save_system(table1, path)
    assert load_system(path) == table1
    assert to_dict(from_dict(json.loads(path.read_text()))) == to_dict(table1)


@pytest.mark.parametrize(
    "doc",
    [
        {"buses": [{"id": 1, "type": "slack", "vm": 1.0, "colour": "red"}], "lines": []},
        {"buses": [{"id": 1, "type": "slack", "vm": 1.0}, {"id": 3, "type": "pv", "vm": 1.0}], "lines": []},
        {"buses": [], "lines": [], "extra": 1},
        [1, 2],
    ],
)
def test_json_rejects(doc):
    with pytest.raises(PowerSystemError):
        from_dict(doc)


def test_two_bus_paths():
    sys = build_system(two_bus(1.0, 0.5))
    assert sys.degrees == (2, 2)
