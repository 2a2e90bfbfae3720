from fractions import Fraction

from pytest import approx, mark, raises

from src.models import ExpressionFormatError, HypothesisError
from src.models.expr import const, exp, var
from src.models.families import (
    FAMILY_KEYS, AFamily, PhiFamily, build_M_A, build_M_Phi, flat_metric,
)
from src.models.plane_wave import PlaneWaveMetric


def broken_family():
    """φ₁,₁′·φ₁,₂′ = 2"""
    phi = {key: var(1) for key in FAMILY_KEYS}
    phi[(1, 1)] = const(2) * var(1)
    return PhiFamily(phi)


def test_identity_family_passes_reciprocity():
    PhiFamily.identity().check()


def test_log_family_passes_reciprocity(log_family):
    log_family.check()
    assert all(abs(r) < 1e-12 for _, _, r in log_family.reciprocity_residuals())


def test_broken_family_is_rejected():
    with raises(HypothesisError):
        build_M_Phi(broken_family())
    metric = build_M_Phi(broken_family(), check=False)
    assert metric.name == 'm-phi'


def test_phi_must_be_univariate():
    phi = {key: var(1) for key in FAMILY_KEYS}
    phi[(2, 1)] = var(2)
    with raises(ExpressionFormatError):
        PhiFamily(phi)


def test_missing_keys():
    with raises(ExpressionFormatError):
        AFamily({(1, 1): Fraction(1)})
    with raises(ExpressionFormatError):
        PhiFamily.from_dict({'phi': {'1,1': {'var': 1}}})


@mark.parametrize('data', [{'a': {'5,1': 1}}, {'b': {}}, {'a': {'x': 1}}])
def test_a_family_json_errors(data):
    with raises(ExpressionFormatError):
        AFamily.from_dict(data)


def test_a_family_json(symmetric_family):
    assert symmetric_family[(1, 2)] == Fraction(2, 3)
    assert AFamily.from_dict(symmetric_family.to_dict()) == symmetric_family


def test_phi_family_json(log_family):
    again = PhiFamily.from_dict(log_family.to_dict())
    for key in FAMILY_KEYS:
        assert again[key].evaluate([0.3]) == approx(log_family[key].evaluate([0.3]))


def test_phi_family_is_composed_with_the_right_coordinate(log_family):
    f = log_family.at((1, 1))
    assert f.variables() == {1}
    assert log_family.at((3, 2)).variables() == {3}
    assert f.evaluate([0.0, 5.0, 7.0]) == approx(1.5)


def test_metric_shapes(m_a, m_phi):
    for metric in (m_a, m_phi, flat_metric()):
        assert isinstance(metric, PlaneWaveMetric)
        assert (metric.a, metric.b, metric.dim) == (3, 8, 14)
    assert m_a.max_degree() == 1
    assert m_phi.is_transcendental()
    assert not m_a.is_transcendental()


def test_m_a_psi_is_linear_in_x(ones_family):
    metric = build_M_A(ones_family)
    for _, _, _, f in metric.psi_entries():
        assert f.degree() == 1


def test_exp_family(exp_family):
    d1 = exp_family.derivative((1, 1))
    assert d1.evaluate([0.0]) == approx(1.0)
    assert exp_family.derivative((1, 2)).evaluate([1.0]) == approx(exp(-var(1)).evaluate([1.0]))
