import numpy as np
import pytest

from pfreal.classify import check_symmetry
from pfreal.errors import LoopRejected
from pfreal.monodromy import (
    ParamFamily,
    ParamLoop,
    four_bus_family,
    generate_group,
    track_line_removal,
    track_loop,
    trivial_indices,
)
from pfreal.permgroup import group_order, identity
from pfreal.pf_model import FOUR_BUS_LINES, build_system, four_bus
from pfreal.poly import evaluate


@pytest.fixture(scope="module")
def zero_group(table1_solutions):
    return generate_group(four_bus(), seed=11, solutions=table1_solutions.array())


def test_family_reproduces_build_system():
    rng = np.random.default_rng(0)
    b = rng.normal(0, 8, 6)
    p = rng.normal(0, 1, 3)
    fam = four_bus_family(four_bus(), "full")
    direct = build_system(four_bus(b=tuple(b), p=tuple(p)))
    via = fam.system(np.concatenate([b, p]))
    x = rng.normal(size=6) + 1j * rng.normal(size=6)
    assert np.allclose(evaluate(direct, x), evaluate(via, x))


def test_segment_endpoints():
    fam = ParamFamily(four_bus())
    p0 = fam.base()
    p1 = p0 + 0.3j
    H = fam.segment(p0, p1)
    x = np.linspace(0.1, 0.6, 6) + 0.2j
    assert np.allclose(H(x, 1.0), evaluate(fam.system(p0), x))
    assert np.allclose(H(x, 0.0), evaluate(fam.system(p1), x))


def test_loop_must_close():
    with pytest.raises(ValueError):
        ParamLoop(np.zeros(2), (np.zeros(2), np.ones(2)))


def test_trivial_loop_is_identity(table1_solutions):
    fam = ParamFamily(four_bus())
    base = fam.base()
    loop = ParamLoop(base, (base, base))
    assert track_loop(fam, table1_solutions.array(), loop) == identity(20)


def test_rejects_unmatched_endpoint(table1_solutions):
    fam = ParamFamily(four_bus())
    base = fam.base()
    loop = ParamLoop(base, (base, base))
    wrong = table1_solutions.array().copy()
    wrong[0] += 0.01
    with pytest.raises(LoopRejected):
        track_loop(fam, wrong, loop)


def test_zero_injection_invariants(zero_group, table1_solutions):
    sols = table1_solutions.array()
    fixed = trivial_indices(sols)
    assert sorted(fixed) == zero_group.fixed_points
    nontrivial = [i for i in range(20) if i not in fixed]
    pairs = [(nontrivial[i], nontrivial[j]) for i, j in check_symmetry(sols[nontrivial])]
    partner = {}
    for i, j in pairs:
        partner[i], partner[j] = j, i
    for perm in zero_group.permutations:
        assert all(perm[i] == i for i in fixed)
        for i, j in pairs:
            assert partner[perm[i]] == perm[j]


def test_zero_injection_order(zero_group):
    assert zero_group.order == 46080
    assert len(zero_group.blocks) == 6 and all(len(b) == 2 for b in zero_group.blocks)
    hist = zero_group.order_history
    assert all(a <= b for a, b in zip(hist, hist[1:]))
    assert max(hist) <= 46080


def test_single_loop_order_divides(zero_group):
    for perm in zero_group.permutations[:10]:
        assert 46080 % group_order([perm]) == 0


def test_insertion_order_irrelevant(zero_group):
    perms = zero_group.permutations
    assert group_order(perms[::-1], 20) == group_order(perms, 20) == zero_group.order


def test_report_is_one_based(zero_group):
    rep = zero_group.report()
    assert rep["order"] == "46080"
    assert min(rep["fixed_points"]) >= 1
    assert set(rep) == {"order", "fixed_points", "blocks", "loops_used", "loops_rejected"}


def test_unknown_slice():
    with pytest.raises(ValueError):
        four_bus_family(four_bus(), "half")


def test_line_removal(table1_solutions):
    lr = track_line_removal(four_bus(), solutions=table1_solutions.array())
    assert len(lr.waypoints) == 5
    assert lr.waypoints[-1][FOUR_BUS_LINES.index((1, 2))] == 0
    assert lr.n_diverged == 4 and lr.n_finite == 16
    for d in lr.diagnoses:
        assert d.top_residual < 1e-6
        assert d.nonreal
