from fractions import Fraction
from itertools import combinations_with_replacement

from pytest import fixture, mark, raises

from src.models import ArityError
from src.models.expr import ZERO, const, var
from src.models.families import build_M_A
from src.models.forms import BilinearForm
from src.models.plane_wave import PlaneWaveMetric, Point, coordinate_frame
from src.utils.geometry import (
    christoffel, christoffel_generic, contract, covariant_derivative_R, curvature_at,
    curvature_generic, metric_at, to_frame,
)
from src.utils.realizations import random_a_family
from src.utils.sampling import random_fraction, random_points

F = Fraction


def point(x, xstar=(0, 0, 0), y=(0,) * 8):
    return Point([F(v) for v in tuple(x) + tuple(xstar) + tuple(y)])


def random_polynomial(rng, a, degree=2):
    """至多 degree 次、係數為小有理數的 x₁..x_a 多項式"""
    f = const(random_fraction(rng, 2, 3))
    for d in range(1, degree + 1):
        for mono in combinations_with_replacement(range(1, a + 1), d):
            term = const(random_fraction(rng, 1, 2))
            for i in mono:
                term = term * var(i)
            f = f + term
    return f


def random_form(rng, b):
    """C = L D Lᵀ：L 為單位下三角，D 為非零對角"""
    d = [random_fraction(rng, 2, 2, nonzero=True) for _ in range(b)]
    low = [[F(1) if j == i else random_fraction(rng, 1, 2) if j < i else F(0) for j in range(b)]
           for i in range(b)]
    return BilinearForm([[sum(low[i][k] * d[k] * low[j][k] for k in range(b)) for j in range(b)]
                         for i in range(b)])


def random_plane_wave(rng, a, b, degree):
    psi = {(i, j): [random_polynomial(rng, a, degree) for _ in range(b)]
           for i in range(a) for j in range(i, a)}
    return PlaneWaveMetric(a, b, random_form(rng, b), psi, name='random')


@fixture
def random_metric(rng):
    a, b = 2, 2
    psi = {(i, j): [random_polynomial(rng, a) for _ in range(b)] for i in range(a) for j in range(i, a)}
    C = BilinearForm([[F(0), F(1)], [F(1), F(2)]])
    return PlaneWaveMetric(a, b, C, psi, name='random')


def test_m_a_metric_components(m_a, rng, exact):
    for coords in random_points(rng, 3, 14, exact):
        g = metric_at(m_a, coords)
        x1, x2 = coords[0], coords[1]
        y41, y42 = coords[12], coords[13]
        assert g[1, 2] == x1 * y41
        assert g[0, 2] == x2 * y42
        assert g[0, 1] == 0
        assert g[0, 3] == 1


def test_m_a_curvature_components(m_a):
    R = curvature_at(m_a, point((F(1, 2), 3, 2), y=(1, 2, 3, 4, 5, 6, 7, 8)))
    assert R(1, 0, 0, 8) == 1
    assert R(0, 1, 1, 0) == -4


@mark.parametrize('x', [(0, 0, 0), (1, -2, F(1, 3)), (F(5, 2), 1, -1)])
def test_m_a_nabla_r_component(m_a, x):
    nabla = covariant_derivative_R(m_a, point(x))
    assert nabla(0, 1, 1, 0, 2) == -2 * F(x[2])


def test_closed_form_matches_koszul_path(random_metric, rng, exact):
    for coords in random_points(rng, 3, random_metric.dim, exact):
        closed = curvature_at(random_metric, coords)
        generic = curvature_generic(random_metric, coords)
        assert closed.nonzero() == generic.nonzero()
        assert christoffel(random_metric, coords).nonzero() == christoffel_generic(random_metric, coords).nonzero()


@mark.slow
def test_closed_form_matches_koszul_path_on_random_metrics(rng, exact):
    for _ in range(50):
        metric = random_plane_wave(rng, rng.randint(1, 3), rng.randint(1, 8), rng.randint(0, 3))
        coords = random_points(rng, 1, metric.dim, exact)[0]
        assert curvature_at(metric, coords).nonzero() == curvature_generic(metric, coords).nonzero()
        assert christoffel(metric, coords).nonzero() == christoffel_generic(metric, coords).nonzero()


def second_bianchi_sums(nabla):
    """∇R(i,j,k,l;m) 對後三個索引輪換求和；回傳非零的和"""
    candidates = set()
    for i, j, k, l, m in nabla.components:
        candidates.update({(i, j, k, l, m), (i, j, m, k, l), (i, j, l, m, k)})
    sums = {}
    for i, j, k, l, m in candidates:
        total = nabla(i, j, k, l, m) + nabla(i, j, l, m, k) + nabla(i, j, m, k, l)
        if total != 0:
            sums[(i, j, k, l, m)] = total
    return sums


@mark.parametrize('family', ['ones_family', 'symmetric_family'])
def test_second_bianchi_identity(request, family, rng, exact):
    metric = build_M_A(request.getfixturevalue(family))
    for coords in random_points(rng, 3, metric.dim, exact):
        assert second_bianchi_sums(covariant_derivative_R(metric, coords, 1)) == {}


def test_second_bianchi_identity_on_random_families(rng, exact):
    for _ in range(5):
        metric = build_M_A(random_a_family(rng, exact))
        coords = random_points(rng, 1, metric.dim, exact)[0]
        assert second_bianchi_sums(covariant_derivative_R(metric, coords, 1)) == {}


def test_metric_determinant_is_constant(m_a, rng, exact):
    origin = metric_at(m_a, [F(0)] * m_a.dim).determinant()
    assert origin != 0
    for coords in random_points(rng, 50, m_a.dim, exact):
        assert metric_at(m_a, coords).determinant() == origin


def test_flat_psi_has_no_curvature():
    metric = PlaneWaveMetric(2, 1, BilinearForm([[F(1)]]), {(0, 1): [ZERO]})
    assert curvature_at(metric, [F(1)] * 5).is_zero()


def test_coordinate_frame_contraction(m_a):
    p = point((1, 2, 3))
    R = curvature_at(m_a, p)
    frame = coordinate_frame(m_a, p)
    assert to_frame(R, frame).nonzero() == R.nonzero()
    assert contract(R, frame, ('x2', 'x1', 'x1', 'y3')) == R(1, 0, 0, 8)


def test_contract_arity(m_a):
    p = point((1, 2, 3))
    with raises(ArityError):
        contract(curvature_at(m_a, p), coordinate_frame(m_a, p), ('x1', 'x2'))
    with raises(ArityError):
        curvature_at(m_a, p)(0, 1)
