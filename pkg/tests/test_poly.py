import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from pfreal.poly import (
    Poly,
    PolySystem,
    compile_system,
    evaluate,
    evaluate_jacobian,
    evaluate_poly,
    homogeneous_top,
    top_form,
)

X = [Poly.var(i, 2) for i in range(2)]


def test_eval_simple():
    x, y = X
    sys = PolySystem(2, (x * x + y * y - 1, x - y))
    assert np.allclose(evaluate(sys, [0.6, 0.8]), [0, -0.2])


def test_dimension_mismatch():
    sys = PolySystem(2, (X[0], X[1]))
    with pytest.raises(ValueError):
        evaluate(sys, [1.0, 2.0, 3.0])


def test_not_square():
    with pytest.raises(ValueError):
        PolySystem(2, (X[0],))


def test_zero_poly_degree():
    assert Poly.const(0.0, 2).degree() == -1
    assert (X[0] - X[0]).is_zero()


def test_jacobian_matches_finite_differences():
    x, y = X
    sys = PolySystem(2, (x**3 * y - 2 * y + 1, x * y * y - x))
    p = np.array([0.3 + 0.1j, -1.2 + 0.4j])
    J = evaluate_jacobian(sys, p)
    h = 1e-7
    for j in range(2):
        e = np.zeros(2, complex)
        e[j] = h
        fd = (evaluate(sys, p + e) - evaluate(sys, p - e)) / (2 * h)
        assert np.allclose(J[:, j], fd, atol=1e-6)


def test_matches_sympy():
    a, b = sympy.symbols("a b")
    expr = 3 * a**2 * b - 2 * a * b + b**3 - 5
    p = 3 * X[0] ** 2 * X[1] - 2 * X[0] * X[1] + X[1] ** 3 - 5
    for pt in [(0.5, -1.5), (2.0, 0.25), (-1.0, 3.0)]:
        ref = float(expr.subs({a: pt[0], b: pt[1]}))
        assert evaluate_poly(p, pt) == pytest.approx(ref)
        da = float(sympy.diff(expr, a).subs({a: pt[0], b: pt[1]}))
        assert p.diff(0)(pt) == pytest.approx(da)


def test_extended_precision():
    import mpmath

    p = X[0] * X[0] - 2
    with mpmath.workprec(200):
        r = mpmath.sqrt(2)
    v = evaluate_poly(p, [r], precision=200)
    assert abs(v) < 1e-50


def test_top_forms():
    x, y = X
    sys = PolySystem(2, (x * x + y * y - x - 1, x - 2 * y + 3), degrees=(2, 2))
    top = top_form(sys)
    assert top.polys[0] == x * x + y * y
    assert top.polys[1] == x - 2 * y
    # declared degree 2 but the equation is linear: its top part is empty
    assert homogeneous_top(sys).polys[1].is_zero()


def test_compile_roundtrip():
    x, y = X
    sys = PolySystem(2, (x * x - y + 2j, 3 * x * y))
    c, exps, ptr = compile_system(sys)
    assert ptr[-1] == len(c) == len(exps)
    pt = np.array([0.7 - 0.2j, 1.1 + 0.5j])
    manual = [sum(c[k] * np.prod(pt ** exps[k]) for k in range(ptr[i], ptr[i + 1])) for i in range(2)]
    assert np.allclose(manual, evaluate(sys, pt))


coef = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
terms = st.lists(st.tuples(st.tuples(st.integers(0, 3), st.integers(0, 3)), coef), max_size=6)
point = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


@settings(max_examples=60, deadline=None)
@given(terms, terms, point)
def test_ring_homomorphism(t1, t2, pt):
    p, q = Poly.from_terms(2, t1), Poly.from_terms(2, t2)
    pv, qv = evaluate_poly(p, pt), evaluate_poly(q, pt)
    scale = 1 + abs(pv) + abs(qv) + abs(pv * qv)
    assert abs(evaluate_poly(p + q, pt) - (pv + qv)) <= 1e-9 * scale
    assert abs(evaluate_poly(p * q, pt) - pv * qv) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(terms, terms)
def test_product_rule(t1, t2):
    p, q = Poly.from_terms(2, t1), Poly.from_terms(2, t2)
    lhs = (p * q).diff(0)
    rhs = p.diff(0) * q + p * q.diff(0)
    pt = (0.37, -1.21)
    assert abs(evaluate_poly(lhs, pt) - evaluate_poly(rhs, pt)) <= 1e-8 * (1 + abs(evaluate_poly(lhs, pt)))
