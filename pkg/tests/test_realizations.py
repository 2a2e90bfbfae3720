from fractions import Fraction

from pytest import approx, fixture, mark, raises

from src.models import ExpressionFormatError, HypothesisError
from src.models.curvature import M14_LABELS
from src.models.expr import const, var
from src.models.families import FAMILY_KEYS, AFamily, PhiFamily, build_M_A, build_M_Phi, flat_metric
from src.models.plane_wave import Point
from src.models.scalar import FLOAT_CONTEXT
from src.utils.geometry import covariant_derivative_R, to_frame
from src.utils.realizations import (
    DIRECT, FRAME, NABLA_PATTERN, UNIT_ORBITS, frame_model, nabla_r_pattern, nabla_r_polynomials,
    normalize_basis_0, normalize_basis_1, random_a_family, random_symmetric_family,
    symmetric_space_check, symmetric_space_equations, transform_frame, verify_0_model,
    verify_0_model_points, xi_csv, xi_from_frame, xi_invariant, xi_sweep,
)
from src.utils.sampling import random_points
from src.utils.symmetry import dilatation, swap23

F = Fraction
ORIGIN = [F(0)] * 14


def along_x1(x1):
    return [x1] + [0.0] * 13


@fixture(scope='module')
def m_exp(exp_family):
    return build_M_Phi(exp_family)


def test_unit_orbits_cover_six_betas():
    assert set(UNIT_ORBITS) == {'b11', 'b12', 'b21', 'b22', 'b31', 'b32'}
    assert UNIT_ORBITS['b11'] == ('a1', 'a3', 'a3')


def test_m_a_is_a_0_model(m_a, symmetric_family, rng, exact):
    points = random_points(rng, 4, 14, exact)
    assert verify_0_model_points(m_a, points, exact).holds
    report = verify_0_model(build_M_A(symmetric_family), points[0], exact)
    assert report.holds
    assert report.stats['max_residual'] == 0


def test_normalization_is_trivial_at_the_origin(m_a, exact):
    frame = normalize_basis_0(m_a, ORIGIN, exact)
    stages = frame.stages
    assert all(s == 1 for s in stages['scales'].values())
    assert all(v == 0 for row in stages['curvature_shifts'] for v in row)
    assert all(v == 0 for row in stages['beta_shifts'] for v in row)
    assert all(v == 0 for row in stages['metric_shifts'] for v in row)


def test_normalized_frame_model_equals_m14(m_a, m14, exact):
    point = [F(1), F(-2), F(1, 2)] + [F(3)] * 11
    model = frame_model(m_a, normalize_basis_0(m_a, point, exact), exact)
    assert model.tensor.equals(m14.tensor)
    assert model.form == m14.form


def test_flat_metric_cannot_be_normalized(exact):
    report = verify_0_model(flat_metric(), ORIGIN, exact)
    assert not report.holds
    assert report.witness.relation == 'normalization'
    assert 'error' in report.details
    with raises(HypothesisError):
        normalize_basis_0(flat_metric(), ORIGIN, exact)


def test_wrong_shape_is_rejected(exact):
    with raises(HypothesisError):
        normalize_basis_0(flat_metric(a=2, b=3), [F(0)] * 7, exact)


def test_broken_reciprocity_is_detected(exact):
    phi = {key: var(1) for key in FAMILY_KEYS}
    phi[(1, 1)] = const(2) * var(1)
    metric = build_M_Phi(PhiFamily(phi), check=False)
    report = verify_0_model(metric, [F(1, 2)] + [F(1)] * 13, exact)
    assert not report.holds
    assert any(m['where'] == 'form' and m['idx'] == ['b11', 'b12'] for m in report.mismatches)
    assert report.to_dict()['witness']['relation'] == 'frame-model-equals-M14'


def test_m_phi_is_a_0_model(m_phi, rng):
    points = [[c / 2 for c in p] for p in random_points(rng, 3, 14, FLOAT_CONTEXT)]
    report = verify_0_model_points(m_phi, points)
    assert report.holds
    assert report.stats['max_residual'] < 1e-9


@mark.parametrize('x1', [0.0, 0.5, -0.7])
def test_first_order_normalization(m_phi, x1):
    frame = normalize_basis_1(m_phi, along_x1(x1))
    assert frame.stages['nabla_r']['b11'] != approx(0)
    nabla = to_frame(covariant_derivative_R(m_phi, frame.point, 1), frame)
    assert nabla_r_pattern(nabla, FLOAT_CONTEXT) == []


def test_nabla_pattern_is_closed_under_first_pair_swap():
    for p, q, r, nu, s in NABLA_PATTERN:
        assert (q, p, r, nu, s) in NABLA_PATTERN


def test_xi_at_origin_of_log_family(m_phi):
    direct = xi_invariant(m_phi, ORIGIN, DIRECT)
    assert direct.value == approx(1 / 81, abs=1e-12)
    assert direct.quotients == approx((8 / 9, 10 / 9))
    framed = xi_invariant(m_phi, ORIGIN, FRAME)
    assert framed.value == approx(1 / 81, abs=1e-9)


@mark.parametrize('x1', [-1.0, 0.25, 1.0])
def test_xi_methods_agree(m_phi, x1):
    direct = xi_invariant(m_phi, along_x1(x1), DIRECT)
    framed = xi_invariant(m_phi, along_x1(x1), FRAME)
    assert framed.value == approx(direct.value, abs=1e-9)


@mark.slow
def test_xi_methods_agree_along_random_x1(m_phi, rng):
    for x1 in (rng.uniform(-1, 1) for _ in range(20)):
        direct = xi_invariant(m_phi, along_x1(x1), DIRECT)
        framed = xi_invariant(m_phi, along_x1(x1), FRAME)
        assert framed.value == approx(direct.value, abs=1e-9)


def test_xi_is_not_constant(m_phi):
    values = xi_sweep(m_phi, ORIGIN, [0.0, 1.0], DIRECT)
    assert abs(values[0].value - values[1].value) > 1e-3


@mark.parametrize('x1', [0.0, 0.8])
def test_exp_family_has_vanishing_xi(m_exp, x1):
    assert xi_invariant(m_exp, along_x1(x1), DIRECT).value == approx(0, abs=1e-12)
    assert xi_invariant(m_exp, along_x1(x1), FRAME).value == approx(0, abs=1e-9)


@mark.parametrize('t', [swap23(), dilatation(F(2), F(1, 2), F(1))])
def test_xi_is_invariant_under_symmetries(m_phi, t):
    frame = normalize_basis_1(m_phi, along_x1(0.4))
    before = xi_from_frame(m_phi, frame, FLOAT_CONTEXT)
    after = xi_from_frame(m_phi, transform_frame(frame, t), FLOAT_CONTEXT)
    assert after.value == approx(before.value, abs=1e-10)


def test_xi_modes(m_a, m_phi):
    with raises(ExpressionFormatError):
        xi_invariant(m_phi, ORIGIN, 'spectral')
    with raises(HypothesisError):
        xi_invariant(m_a, ORIGIN, DIRECT)


def test_xi_csv(m_phi):
    text = xi_csv(xi_sweep(m_phi, ORIGIN, [0.0, 0.5], DIRECT))
    lines = text.strip().split('\n')
    assert lines[0] == 'x1,Xi'
    assert len(lines) == 3
    assert float(lines[1].split(',')[1]) == approx(1 / 81)


def test_symmetric_equation_residuals(ones_family, symmetric_family):
    assert symmetric_space_equations(ones_family) == (1, 5, 5)
    assert symmetric_space_equations(symmetric_family) == (0, 0, 0)


def test_solved_family_is_locally_symmetric(symmetric_family, exact):
    report = symmetric_space_check(symmetric_family, exact)
    assert report.holds
    assert report.details['verdicts_agree']


def test_ones_family_is_not_locally_symmetric(ones_family, exact):
    report = symmetric_space_check(ones_family, exact)
    assert not report.holds
    assert report.details['residuals'] == [1, 5, 5]
    assert not report.details['nabla_r_vanishes']
    assert report.details['verdicts_agree']
    assert report.witness.relation == 'nabla-r-vanishes'


def test_nabla_r_polynomials_for_ones(ones_family, exact):
    polys = nabla_r_polynomials(ones_family, exact)
    x = [F(2), F(3), F(5)]
    assert polys[(1, 2, 2, 1, 3)].evaluate(x) == -2 * x[2]
    assert polys[(1, 3, 3, 2, 1)].evaluate(x) == F(-7, 3) * x[1]


def test_nabla_r_polynomials_for_solved_family(symmetric_family, exact):
    polys = nabla_r_polynomials(symmetric_family, exact)
    assert all(p.evaluate([F(1), F(2), F(3)]) == 0 for p in polys.values())


@mark.slow
def test_criteria_agree_on_random_families(rng, exact):
    for _ in range(100):
        family = random_symmetric_family(rng, exact)
        assert symmetric_space_equations(family) == (0, 0, 0)
        report = symmetric_space_check(family, exact, rng, points=2)
        assert report.holds
    for _ in range(100):
        report = symmetric_space_check(random_a_family(rng, exact), exact, rng, points=2)
        assert report.details['verdicts_agree']


def test_frame_labels(m_a, exact):
    frame = normalize_basis_0(m_a, ORIGIN, exact)
    assert frame.roles == M14_LABELS
    assert frame.is_independent(exact)
    assert isinstance(frame.point, Point)


@mark.slow
def test_solved_family_has_parallel_curvature_at_many_points(symmetric_family, rng, exact):
    report = symmetric_space_check(symmetric_family, exact, rng, points=20)
    assert report.holds
    assert report.stats['points'] == 20
