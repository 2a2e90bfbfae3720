from fractions import Fraction

import sympy
from pytest import approx, mark, raises

from src.models import ExpressionFormatError, JetEvaluationError
from src.models.expr import Const, ONE, ZERO, add, compose, const, exp, expr_from_dict, jet_eval, log, mul, power, sin, var

x1, x2 = var(1), var(2)
s1, s2 = sympy.symbols('x1 x2')


def test_constant_folding():
    assert add(const(2), const(3)) == Const(5)
    assert mul(ZERO, x1) == ZERO
    assert mul(ONE, x1) == x1
    assert exp(const(0)) == ONE
    assert log(const(1)) == ZERO
    assert isinstance(const(1).value, Fraction)


def test_compose_with_variable_outer_returns_argument():
    assert compose(var(1), [x2 * 3]) == x2 * 3


def test_evaluate_exact():
    f = x1 * x1 + x2 / 2
    assert f.evaluate([Fraction(3), Fraction(1)]) == Fraction(19, 2)


@mark.parametrize('build, oracle', [
    (lambda: x1 * x1 * x2 + power(x2, 3), s1 ** 2 * s2 + s2 ** 3),
    (lambda: exp(x1 * x2), sympy.exp(s1 * s2)),
    (lambda: sin(x1) * log(x2), sympy.sin(s1) * sympy.log(s2)),
    (lambda: (x1 + 1) / (x2 * x2 + 1), (s1 + 1) / (s2 ** 2 + 1)),
])
def test_diff_matches_sympy(build, oracle):
    f = build()
    point = [0.7, 1.3]
    subs = {s1: point[0], s2: point[1]}
    for index, symbol in ((1, s1), (2, s2)):
        expected = float(sympy.diff(oracle, symbol).subs(subs))
        assert f.diff(index).evaluate(point) == approx(expected, rel=1e-12)


def test_degree():
    assert (x1 * x1 * x2).degree() == 3
    assert exp(x1).degree() is None
    assert const(4).degree() == 0


def test_jet_eval_mixed_partials():
    f = x1 * x1 * x2
    jet = jet_eval(f, [Fraction(2), Fraction(3)], [1, 2], 3)
    assert jet.value == 12
    assert jet.partial(0) == 12
    assert jet.partial(0, 1) == 4
    assert jet.partial(0, 0, 1) == 2


def test_jet_eval_log_outside_domain():
    with raises(JetEvaluationError):
        jet_eval(log(x1), [-1.0], [1], 2)


def test_from_dict_nodes():
    data = {'op': 'add', 'args': [
        {'op': 'exp', 'args': [{'var': 1}]},
        {'op': 'pow', 'args': [{'var': 2}, 2]},
        {'op': 'neg', 'args': ['1/2']},
    ]}
    f = expr_from_dict(data)
    assert f.evaluate([0.0, 3.0]) == approx(1 + 9 - 0.5)


@mark.parametrize('data', [
    {'op': 'tan', 'args': [{'var': 1}]},
    {'op': 'pow', 'args': [{'var': 1}, '1/2']},
    {'op': 'add'},
    [1, 2],
])
def test_from_dict_rejects_bad_nodes(data):
    with raises(ExpressionFormatError):
        expr_from_dict(data)
