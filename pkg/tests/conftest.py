from fractions import Fraction

import pytest
from hypothesis import settings

from src.models.curvature import build_M14
from src.models.families import AFamily, PhiFamily, build_M_A, build_M_Phi
from src.models.scalar import FLOAT_CONTEXT, RATIONAL_CONTEXT
from src.utils.inputs import fixture_path, load_json
from src.utils.sampling import make_rng

settings.register_profile('default', deadline=None, max_examples=50)
settings.load_profile('default')


@pytest.fixture(scope='session')
def m14():
    return build_M14()


@pytest.fixture
def rng():
    return make_rng(2024)


@pytest.fixture
def exact():
    return RATIONAL_CONTEXT


@pytest.fixture
def approx():
    return FLOAT_CONTEXT


@pytest.fixture(scope='session')
def ones_family():
    return AFamily.constant(Fraction(1))


@pytest.fixture(scope='session')
def symmetric_family():
    return AFamily.from_dict(load_json(fixture_path('sym.json')))


@pytest.fixture(scope='session')
def m_a(ones_family):
    return build_M_A(ones_family)


@pytest.fixture(scope='session')
def log_family():
    return PhiFamily.from_dict(load_json(fixture_path('log-family.json')))


@pytest.fixture(scope='session')
def exp_family():
    return PhiFamily.from_dict(load_json(fixture_path('exp-family.json')))


@pytest.fixture(scope='session')
def m_phi(log_family):
    return build_M_Phi(log_family)
