import math
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st
from pytest import approx, raises

from src.models import JetEvaluationError, TranscendentalError
from src.models.jet import Jet

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def test_exp_at_zero_is_exact():
    t = Jet.variable(0, Fraction(0), 4)
    assert t.exp().derivative_sequence(0) == (1, 1, 1, 1, 1)
    assert t.sin().derivative_sequence(0) == (0, 1, 0, -1, 0)


def test_exp_away_from_zero_needs_float():
    with raises(TranscendentalError):
        Jet.variable(0, Fraction(1), 2).exp()
    e = Jet.variable(0, 1.0, 2).exp()
    assert e.derivative_sequence(0) == approx((math.e,) * 3)


def test_truncation_drops_high_orders():
    t = Jet.variable(0, Fraction(0), 2)
    cube = t * t * t
    assert cube.coeffs == {}


@given(small, small)
def test_product_rule(a, b):
    x = Jet.variable(0, a, 3)
    y = Jet.variable(1, b, 3)
    f = x * x * y + y * 3
    assert f.partial(0) == 2 * a * b
    assert f.partial(1) == a * a + 3
    assert f.partial(0, 0, 1) == 2


@given(small.filter(lambda v: v != 0))
def test_reciprocal(a):
    x = Jet.variable(0, a, 3)
    r = 1 / x
    assert r.derivative_sequence(0) == (1 / a, -1 / a ** 2, 2 / a ** 3, -6 / a ** 4)


def test_division_by_zero_value():
    with raises(JetEvaluationError):
        Jet.variable(0, Fraction(0), 2).reciprocal()


def test_log_domain():
    with raises(JetEvaluationError):
        Jet.variable(0, -1.0, 2).log()
    assert Jet.variable(0, Fraction(1), 2).log().derivative_sequence(0) == (0, 1, -1)


def test_derivative_lowers_order():
    f = Jet.variable(0, Fraction(2), 3) ** 3
    d = f.derivative(0)
    assert d.order == 2
    assert d.derivative_sequence(0) == (12, 12, 6)
    with raises(JetEvaluationError):
        Jet.constant(Fraction(1), 0).derivative(0)
