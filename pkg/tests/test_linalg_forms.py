from fractions import Fraction

from hypothesis import assume, given
from hypothesis import strategies as st
from pytest import mark, raises

from src.models import ConstraintError, DegenerateFormError, ExpressionFormatError, SingularMapError
from src.models.forms import BilinearForm, invert_form, signature
from src.utils import linalg

entry = st.fractions(min_value=-4, max_value=4, max_denominator=3)


def matrices(rows, cols):
    return st.lists(st.lists(entry, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@given(matrices(3, 3))
def test_inverse_times_matrix_is_identity(m):
    assume(linalg.determinant(m) != 0)
    assert linalg.mat_mul(linalg.inverse(m), m) == linalg.identity(3)


@given(matrices(3, 5))
def test_rank_nullity(m):
    basis = linalg.nullspace(m, 5)
    assert linalg.rank(m) + len(basis) == 5
    for v in basis:
        assert linalg.mat_vec(m, v) == [0, 0, 0]


@given(matrices(3, 3), st.lists(entry, min_size=3, max_size=3))
def test_solve_reproduces_rhs(m, x):
    rhs = linalg.mat_vec(m, x)
    solution = linalg.solve(m, rhs)
    assert linalg.mat_vec(m, solution) == rhs


def test_inconsistent_system():
    with raises(ConstraintError):
        linalg.solve([[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]], [Fraction(1), Fraction(3)])


def test_singular_inverse():
    with raises(SingularMapError):
        linalg.inverse([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]])


def test_span_coordinates():
    basis, pivots = linalg.span_basis([[Fraction(v) for v in row] for row in ([1, 1, 0], [0, 1, 1])])
    assert linalg.span_coordinates(basis, pivots, [2, 3, 1]) == [2, 3]
    assert linalg.span_coordinates(basis, pivots, [0, 0, 1]) is None


@mark.parametrize('rows, expected', [
    ([[1, 0], [0, 1]], (0, 2)),
    ([[0, 1], [1, 0]], (1, 1)),
    ([[-1, 0, 0], [0, -2, 0], [0, 0, 3]], (2, 1)),
    ([[Fraction(-1, 2), Fraction(1, 4)], [Fraction(1, 4), Fraction(-1, 2)]], (2, 0)),
])
def test_signature(rows, expected):
    assert signature(BilinearForm(rows)) == expected


def test_signature_rejects_degenerate_forms():
    with raises(DegenerateFormError):
        signature(BilinearForm([[1, 0], [0, 0]]))
    with raises(DegenerateFormError):
        invert_form(BilinearForm([[0, 0], [0, 0]]))


def test_asymmetric_form():
    with raises(ExpressionFormatError):
        BilinearForm([[1, 2], [3, 1]])


def test_form_evaluation():
    g = BilinearForm([[0, 1], [1, 0]])
    assert g([1, 2], [3, 4]) == 10
    assert g[0, 1] == 1
