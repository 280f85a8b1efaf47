"""Jet arithmetic against hand-computed and sympy-frozen derivatives."""

import itertools
import json
import math
from pathlib import Path

import numpy as np
import pytest

from gammaforge.errors import JetDomainError, JetShapeError, SingularJetMatrixError
from gammaforge.jets import (
    Jet,
    JetMatrix,
    jet_add,
    jet_compose_scalar,
    jet_matrix_inverse,
    jet_mul,
    monomial_probe,
)

FIXTURES = Path(__file__).parent / "fixtures"


def random_jet(rng, dim, order, point=None, scale=1.0):
    point = tuple(rng.uniform(-1, 1, dim)) if point is None else point
    j = Jet.constant(0.0, point, order)
    j.coeffs[:] = rng.uniform(-1, 1, j.coeffs.shape) * scale
    return j


# -- spec'd pointwise examples ----------------------------------------------

def test_add_linear_example():
    f = Jet.coordinate(0, (0.0,), 2)          # f(x) = x
    g = Jet.constant(1.0, (0.0,), 2)          # g(x) = 1
    s = jet_add(f, g)
    assert s.deriv((0,)) == 1.0
    assert s.deriv((1,)) == 1.0
    assert s.deriv((2,)) == 0.0


def test_add_zero_identity():
    rng = np.random.default_rng(7)
    a = random_jet(rng, 3, 2)
    zero = Jet.constant(0.0, a.point, 2)
    assert np.array_equal((a + zero).coeffs, a.coeffs)


def test_add_sin_plus_cos_order3():
    # derivatives of sin + cos at 0: (1, 1, -1, -1)
    s = jet_compose_scalar("sin", Jet.coordinate(0, (0.0,), 3))
    c = jet_compose_scalar("cos", Jet.coordinate(0, (0.0,), 3))
    total = s + c
    assert np.allclose([total.deriv((k,)) for k in range(4)], [1.0, 1.0, -1.0, -1.0], atol=1e-14)


def test_mul_polynomial_example():
    x = Jet.coordinate(0, (0.0,), 2)
    p = jet_mul(1.0 + x, 1.0 - x)             # 1 - x^2
    assert p.deriv((0,)) == 1.0
    assert p.deriv((1,)) == 0.0
    assert p.deriv((2,)) == -2.0


def test_mul_unit_identity():
    rng = np.random.default_rng(8)
    a = random_jet(rng, 2, 3)
    one = Jet.constant(1.0, a.point, 3)
    assert np.allclose((a * one).coeffs, a.coeffs, atol=0)


def test_mul_sin_cos_half_angle():
    # sin*cos = sin(2x)/2: at pi/4 the derivatives are (1/2, 0, -2)
    pt = (math.pi / 4,)
    s = jet_compose_scalar("sin", Jet.coordinate(0, pt, 2))
    c = jet_compose_scalar("cos", Jet.coordinate(0, pt, 2))
    p = s * c
    expected = [0.5 * math.sin(math.pi / 2), math.cos(math.pi / 2), -2.0 * math.sin(math.pi / 2)]
    assert np.allclose([p.deriv((k,)) for k in range(3)], expected, atol=1e-14)


def test_compose_exp_of_zero_jet():
    z = Jet.constant(0.0, (0.3,), 3)
    e = jet_compose_scalar("exp", z)
    assert np.allclose(e.coeffs, [1.0, 0.0, 0.0, 0.0], atol=0)


def test_compose_log_exp_roundtrip():
    rng = np.random.default_rng(9)
    for _ in range(20):
        a = random_jet(rng, 2, 3, scale=0.4)
        back = jet_compose_scalar("log", jet_compose_scalar("exp", a))
        assert np.allclose(back.coeffs, a.coeffs, atol=1e-12)


def test_compose_sin_of_square():
    # sin(x^2) at x=1: value sin 1, first 2 cos 1, second 2 cos 1 - 4 sin 1
    x = Jet.coordinate(0, (1.0,), 2)
    f = jet_compose_scalar("sin", x * x)
    assert np.allclose(
        [f.deriv((0,)), f.deriv((1,)), f.deriv((2,))],
        [math.sin(1), 2 * math.cos(1), 2 * math.cos(1) - 4 * math.sin(1)],
        atol=1e-14,
    )


def test_monomial_probe_examples():
    p = monomial_probe((0.0, 0.0), (1.0, 0.0), 2)
    assert p.value == 0.0
    assert np.array_equal(p.gradient(), [1.0, 0.0])
    assert np.all(p.hessian() == 0.0)

    z = monomial_probe((0.4, -0.2), (0.0, 0.0), 3)
    assert np.all(z.coeffs == 0.0)

    q = monomial_probe((1.0, 2.0), (3.0, -1.0), 2)
    assert q.value == 0.0
    assert np.array_equal(q.gradient(), [3.0, -1.0])


# -- calculus-law properties --------------------------------------------------

def test_add_mul_commutative_associative():
    rng = np.random.default_rng(10)
    for _ in range(30):
        pt = tuple(rng.uniform(-1, 1, 2))
        a, b, c = (random_jet(rng, 2, 3, pt) for _ in range(3))
        assert np.allclose((a + b).coeffs, (b + a).coeffs, atol=1e-12)
        assert np.allclose((a * b).coeffs, (b * a).coeffs, atol=1e-12)
        assert np.allclose(((a + b) + c).coeffs, (a + (b + c)).coeffs, atol=1e-12)
        assert np.allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-12)


def brute_force_product(a, b):
    """Independent generalized-Leibniz convolution over multi-index dicts."""
    da, db = a.partials(), b.partials()
    out = {}
    for alpha, va in da.items():
        for beta, vb in db.items():
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            if sum(gamma) > a.order:
                continue
            w = 1.0
            for x, y in zip(alpha, beta):
                w *= math.comb(x + y, x)
            out[gamma] = out.get(gamma, 0.0) + w * va * vb
    return out


def test_leibniz_against_brute_force():
    rng = np.random.default_rng(11)
    for dim, order in [(1, 4), (2, 3), (3, 2), (4, 2)]:
        pt = tuple(rng.uniform(-1, 1, dim))
        a, b = random_jet(rng, dim, order, pt), random_jet(rng, dim, order, pt)
        expected = brute_force_product(a, b)
        got = (a * b).partials()
        for alpha, v in expected.items():
            assert abs(got[alpha] - v) < 1e-12


def test_compose_against_frozen_sympy_catalog():
    data = json.loads((FIXTURES / "jet_compositions.json").read_text())
    assert len(data["cases"]) == 20
    for case in data["cases"]:
        for order in range(2, data["order"] + 1):
            inner = Jet.constant(0.0, case["point"], order)
            for key, v in case["inner_partials"].items():
                alpha = tuple(int(t) for t in key.split(","))
                if sum(alpha) <= order:
                    inner.coeffs[inner.space.index_of[alpha]] = v
            composed = jet_compose_scalar(case["phi"], inner)
            for key, v in case["composed_partials"].items():
                alpha = tuple(int(t) for t in key.split(","))
                if sum(alpha) <= order:
                    assert composed.deriv(alpha) == pytest.approx(v, abs=1e-10), (
                        case["name"],
                        order,
                        alpha,
                    )


def test_derivative_shift():
    x = Jet.coordinate(0, (0.5,), 3)
    f = jet_compose_scalar("sin", x)
    df = f.derivative(0)
    assert df.order == 2
    assert np.allclose(
        [df.deriv((0,)), df.deriv((1,)), df.deriv((2,))],
        [math.cos(0.5), -math.sin(0.5), -math.cos(0.5)],
        atol=1e-14,
    )


def test_truncation():
    rng = np.random.default_rng(12)
    a = random_jet(rng, 2, 3)
    t = a.truncated(1)
    assert t.order == 1
    assert t.value == a.value
    assert np.array_equal(t.gradient(), a.gradient())
    with pytest.raises(JetShapeError):
        t.truncated(3)


# -- jet matrices --------------------------------------------------------------

def test_matrix_inverse_identity():
    eye = JetMatrix.identity(3, (0.0, 0.0, 0.0), 2)
    inv = jet_matrix_inverse(eye)
    assert (inv - eye).max_abs_coeff() < 1e-14


def test_matrix_inverse_diagonal_example():
    # diag(1+x, 2) at x=0, order 1 -> diag(1-x, 1/2)
    x = Jet.coordinate(0, (0.0,), 1)
    zero = Jet.constant(0.0, (0.0,), 1)
    m = JetMatrix([[1.0 + x, zero], [zero, Jet.constant(2.0, (0.0,), 1)]])
    inv = jet_matrix_inverse(m)
    assert inv.entries[0][0].value == pytest.approx(1.0)
    assert inv.entries[0][0].deriv((1,)) == pytest.approx(-1.0)
    assert inv.entries[1][1].value == pytest.approx(0.5)
    assert inv.entries[1][1].deriv((1,)) == pytest.approx(0.0)


def test_matrix_inverse_halfplane_cometric():
    # invert G = y^2 I at (0, 1), order 2: entries of y^-2 I have derivs 1, -2, 6
    pt = (0.0, 1.0)
    y = Jet.coordinate(1, pt, 2)
    zero = Jet.constant(0.0, pt, 2)
    y2 = y * y
    g = jet_matrix_inverse(JetMatrix([[y2, zero], [zero, y2]]))
    for i in range(2):
        e = g.entries[i][i]
        assert e.value == pytest.approx(1.0, abs=1e-12)
        assert e.deriv((0, 1)) == pytest.approx(-2.0, abs=1e-12)
        assert e.deriv((0, 2)) == pytest.approx(6.0, abs=1e-12)
    assert abs(g.entries[0][1].coeffs).max() < 1e-12


def test_matrix_inverse_random_spd():
    rng = np.random.default_rng(13)
    pt = (0.1, -0.2, 0.3)
    for _ in range(10):
        entries = [[None] * 3 for _ in range(3)]
        base = rng.uniform(-1, 1, (3, 3))
        spd = base @ base.T + 2.0 * np.eye(3)
        for i in range(3):
            for j in range(i, 3):
                jet = random_jet(rng, 3, 2, pt)
                jet.coeffs[0] = spd[i, j]
                entries[i][j] = jet
                if i != j:
                    entries[j][i] = jet
        m = JetMatrix(entries)
        prod = m @ jet_matrix_inverse(m)
        assert (prod - JetMatrix.identity(3, pt, 2)).max_abs_coeff() < 1e-10


def test_matrix_inverse_singular():
    zero = Jet.constant(0.0, (0.0,), 1)
    with pytest.raises(SingularJetMatrixError) as err:
        jet_matrix_inverse(JetMatrix([[zero]]))
    assert err.value.smallest_singular_value == 0.0


# -- error contracts ------------------------------------------------------------

def test_shape_mismatch_errors():
    a = Jet.constant(1.0, (0.0,), 2)
    with pytest.raises(JetShapeError):
        jet_add(a, Jet.constant(1.0, (0.0, 0.0), 2))
    with pytest.raises(JetShapeError):
        jet_add(a, Jet.constant(1.0, (0.0,), 3))
    with pytest.raises(JetShapeError):
        jet_mul(a, Jet.constant(1.0, (0.5,), 2))
    with pytest.raises(JetShapeError):
        Jet.constant(1.0, (0.0,), 5)


@pytest.mark.parametrize(
    "fn,value",
    [("log", 0.0), ("log", -1.0), ("sqrt", -0.5), ("sqrt", 0.0), ("recip", 0.0)],
)
def test_domain_errors(fn, value):
    with pytest.raises(JetDomainError):
        jet_compose_scalar(fn, Jet.constant(value, (0.0,), 2))


def test_pow_const_and_recip_values():
    x = Jet.coordinate(0, (2.0,), 3)
    p = jet_compose_scalar("pow_const", x, exponent=1.5)
    assert p.value == pytest.approx(2.0**1.5)
    assert p.deriv((1,)) == pytest.approx(1.5 * 2.0**0.5)
    r = jet_compose_scalar("recip", x)
    assert np.allclose(
        [r.deriv((k,)) for k in range(4)],
        [0.5, -0.25, 0.25, -0.375],
        atol=1e-14,
    )


def test_division_matches_recip():
    rng = np.random.default_rng(14)
    a = random_jet(rng, 2, 3)
    b = random_jet(rng, 2, 3, a.point)
    b.coeffs[0] = 1.7  # keep the denominator away from zero
    q = a / b
    assert np.allclose((q * b).coeffs, a.coeffs, atol=1e-12)
