from fractions import Fraction

from pytest import mark

from src.models.curvature import (
    ALPHA_STAR, BETA, M14_LABELS, CurvatureTensor, Model0, canonical_index, orbit,
)
from src.models.forms import signature
from src.models.operators import jacobi, jacobi_polarized
from src.utils import linalg
from src.utils.checks import validate_curvature_symmetries
from src.utils.sampling import random_vector


def test_m14_signature(m14):
    assert m14.dim == 14
    assert signature(m14.form) == (8, 6)


def test_m14_satisfies_curvature_symmetries(m14):
    report = validate_curvature_symmetries(m14.tensor, labels=m14.labels)
    assert report.holds
    assert report.stats['orbits'] == 10


def test_m14_entries(m14):
    i = m14.index
    assert m14.tensor(i('a2'), i('a1'), i('a1'), i('b21')) == 1
    assert m14.tensor(i('a1'), i('a2'), i('a1'), i('b21')) == -1
    assert m14.tensor(i('a1'), i('a2'), i('a3'), i('b41')) == Fraction(-1, 2)
    assert m14.tensor(i('a1'), i('a1'), i('a2'), i('b21')) == 0


def test_raise_index_on_beta4_block(m14):
    lowered = [Fraction(0)] * 14
    lowered[m14.index('b41')] = Fraction(1)
    raised = m14.raise_index(lowered)
    assert (raised[m14.index('b41')], raised[m14.index('b42')]) == (Fraction(-8, 3), Fraction(-4, 3))
    assert all(v == 0 for k, v in enumerate(raised) if k not in (BETA[6], BETA[7]))


def test_jacobi_product_witness(m14):
    e = m14.basis_vector
    first = jacobi(m14, e('a2')).apply(e('a1'))
    assert first == e('b11')
    assert jacobi(m14, e('a3')).apply(first) == e('a1*')


@mark.parametrize('outer, inner, expected', [
    (('a1', 'a2'), ('a1', 'a3'), {'a2*': Fraction(-1)}),
    (('a1', 'a3'), ('a1', 'a2'), {'a2*': Fraction(1, 3)}),
])
def test_skew_product_witnesses(m14, outer, inner, expected):
    e = m14.basis_vector
    z = m14.skew_apply(e(inner[0]), e(inner[1]), e('a3'))
    w = m14.skew_apply(e(outer[0]), e(outer[1]), z)
    assert {M14_LABELS[k]: v for k, v in enumerate(w) if v != 0} == expected


def test_skew_image_through_beta4(m14):
    e = m14.basis_vector
    z = m14.skew_apply(e('a1'), e('a2'), e('a3'))
    assert {M14_LABELS[k]: v for k, v in enumerate(z) if v != 0} == {
        'b41': Fraction(2, 3), 'b42': Fraction(-2, 3)}


def test_canonical_index():
    assert canonical_index((0, 0, 1, 2)) == (None, 0)
    key, sign = canonical_index((1, 0, 2, 3))
    assert key == (0, 1, 2, 3) and sign == -1
    assert orbit((0, 1, 2, 3))[(2, 3, 0, 1)] == 1


@mark.parametrize('items, reason', [
    ([((0, 0, 1, 2), 1)], 'pair-antisymmetry'),
    ([((0, 1, 0, 1), 1), ((1, 0, 0, 1), 1)], 'inconsistent-orbit'),
])
def test_from_components_records_violations(items, reason):
    tensor = CurvatureTensor.from_components(4, items)
    report = validate_curvature_symmetries(tensor)
    assert not report.holds
    assert report.witness.relation == reason


def test_bianchi_failure_has_witness():
    tensor = CurvatureTensor.from_components(4, [((0, 1, 2, 3), Fraction(1))])
    report = validate_curvature_symmetries(tensor)
    assert not report.holds
    assert report.witness.relation == 'first-bianchi'


def test_model_json_roundtrip(m14):
    again = Model0.from_dict(m14.to_dict())
    assert again.tensor.equals(m14.tensor)
    assert again.form == m14.form
    assert again.labels == m14.labels


def test_alpha_star_is_null(m14):
    for i in ALPHA_STAR:
        for j in ALPHA_STAR:
            assert m14.form[i, j] == 0


def test_jacobi_polarization(m14, rng, exact):
    x = random_vector(rng, 14, exact, bound=2)
    y = random_vector(rng, 14, exact, bound=2)
    mixed = jacobi_polarized(m14, x, y).matrix()
    assert mixed == jacobi_polarized(m14, y, x).matrix()
    # 𝒥(x + y) = 𝒥(x) + 𝒥(y) + 2𝒥(x, y)
    total = jacobi(m14, [a + b for a, b in zip(x, y)]).matrix()
    expected = linalg.mat_add(linalg.mat_add(jacobi(m14, x).matrix(), jacobi(m14, y).matrix()),
                              linalg.mat_scale(mixed, 2))
    assert total == expected


@mark.slow
def test_jacobi_operator_identities_on_random_vectors(m14, rng, exact):
    for _ in range(200):
        x = random_vector(rng, 14, exact, bound=2)
        y = random_vector(rng, 14, exact, bound=2)
        op = jacobi(m14, x)
        assert op.is_self_adjoint(m14.form)
        assert not any(op.apply(x))
        # ⟨𝒥(x)y, y⟩ = A(y, x, x, y)
        direct = sum(v * y[i] * x[j] * x[k] * y[l]
                     for (i, j, k, l), v in m14.tensor.components.items())
        assert m14.form(op.apply(y), y) == direct
