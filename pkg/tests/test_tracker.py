import numpy as np
import pytest

from pfreal.pf_model import build_system, four_bus, two_bus
from pfreal.poly import Poly, PolySystem, evaluate
from pfreal.tracker import (
    DIVERGED,
    FINITE,
    HomotopyConfig,
    classify_divergence,
    solve_all,
    start_system,
)


def test_config_validation():
    with pytest.raises(ValueError):
        HomotopyConfig(step_min=-1)
    with pytest.raises(ValueError):
        HomotopyConfig(divergence_radius=0.5)
    g = HomotopyConfig(seed=4).resolved_gamma()
    assert abs(abs(g) - 1) < 1e-12
    assert HomotopyConfig(seed=4).resolved_gamma() == g


def test_start_system_roots():
    x, y = Poly.var(0, 2), Poly.var(1, 2)
    sys = PolySystem(2, (x * x + y - 1, x * y * y - 2))
    g, pts = start_system(sys)
    assert len(pts) == 6
    for p in pts:
        assert np.max(np.abs(evaluate(g, p))) < 1e-12


def test_univariate_roots_match_numpy():
    x = Poly.var(0, 1)
    p = x**5 - 3 * x**3 + x - 0.5
    ss = solve_all(PolySystem(1, (p,)))
    ref = np.roots([1, 0, -3, 0, 1, -0.5])
    assert len(ss.solutions) == 5
    for r in ref:
        assert min(abs(s[0] - r) for s in ss.solutions) < 1e-10


def test_singular_endpoint_flagged():
    x, y = Poly.var(0, 2), Poly.var(1, 2)
    # double root at (1, 1)
    sys = PolySystem(2, ((x - 1) ** 2, y - x))
    ss = solve_all(sys)
    assert len(ss.solutions) == 1
    assert ss.singular[0]
    assert np.allclose(ss.solutions[0], [1, 1], atol=1e-5)


def test_path_count_conservation(table1_solutions):
    ss = table1_solutions
    assert ss.total_paths == 64
    assert ss.finite_paths + ss.diverged_count + ss.failed_count == 64
    assert ss.failed_count == 0
    assert len(ss.solutions) == 20


def test_residuals_small(table1, table1_solutions):
    sys = build_system(table1)
    for x in table1_solutions.solutions:
        assert np.max(np.abs(evaluate(sys, x))) < 1e-10


def test_conjugate_closure(table1_solutions):
    pts = table1_solutions.array()
    for x in pts:
        assert np.min(np.max(np.abs(pts - np.conj(x)), axis=1)) < 1e-8 * max(1.0, np.max(np.abs(x)))


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_gamma_independence(seed, table1, table1_solutions):
    ss = solve_all(build_system(table1), HomotopyConfig(seed=seed))
    assert len(ss.solutions) == len(table1_solutions.solutions)
    ref = table1_solutions.array()
    for x in ss.solutions:
        assert np.min(np.max(np.abs(ref - x), axis=1)) < 1e-8


def test_canonical_order_is_deterministic(table1):
    a = solve_all(build_system(table1), HomotopyConfig(seed=0)).array()
    b = solve_all(build_system(table1), HomotopyConfig(seed=0)).array()
    assert np.array_equal(a, b)


def test_two_bus_divergence():
    ss = solve_all(build_system(two_bus(1.0, 0.5)))
    assert len(ss.solutions) == 2 and ss.diverged_count == 2
    for p in ss.diverged_paths:
        d = classify_divergence(build_system(two_bus(1.0, 0.5)), p)
        assert d.top_residual < 1e-6
        assert d.nonreal


def test_classify_divergence_ignores_finite(table1, table1_solutions):
    p = next(p for p in table1_solutions.paths if p.status == FINITE)
    assert classify_divergence(build_system(table1), p) is None
    assert any(p.status == DIVERGED for p in table1_solutions.paths)


def test_large_finite_solutions_not_lost():
    # a nearly open line pushes some solutions far out; they must still be found
    b = (0.0105, 21.55, 3.80, -6.47, -7.01, 10.05)
    ss = solve_all(build_system(four_bus(b=b)))
    assert len(ss.solutions) == 20
    assert ss.failed_count == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_no_jump_to_nearby_root(seed):
    # a trivial root sits about 0.06 from a nonreal pair here; an early
    # endgame acceptance once sent the trivial path to its neighbour
    from pfreal.classify import split_trivial
    from pfreal.survey import gaussian_sampler

    b = tuple(gaussian_sampler(2024, 442, 0.0, 8.0))
    ss = solve_all(build_system(four_bus(b=b)), HomotopyConfig(seed=seed))
    assert len(ss.solutions) == 20
    assert len(split_trivial(ss.solutions)[0]) == 8
    assert all(m == 1 for m in ss.multiplicity)
