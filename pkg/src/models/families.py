import logging
from dataclasses import dataclass
from fractions import Fraction

from src.models import ExpressionFormatError, HypothesisError, JacobiTsankovError
from src.models.curvature import BETA, m14_form
from src.models.expr import ZERO, compose, expr_from_dict, var
from src.models.forms import BilinearForm
from src.models.plane_wave import PlaneWaveMetric
from src.models.scalar import RATIONAL_CONTEXT, scalar_from_json, scalar_to_json

logger = logging.getLogger(__name__)

FAMILY_KEYS = ((1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2))
# y 座標依 β 的順序：y₁,₁ y₁,₂ y₂,₁ y₂,₂ y₃,₁ y₃,₂ y₄,₁ y₄,₂
Y = {key: mu for mu, key in enumerate(FAMILY_KEYS + ((4, 1), (4, 2)))}
RECIPROCITY_SAMPLES = (-1.0, -0.5, 0.0, 0.5, 1.0)


def _key(text):
    try:
        i, j = (int(s) for s in str(text).split(','))
    except ValueError:
        raise ExpressionFormatError(f"鍵必須是 'i,j'：{text}") from None
    if (i, j) not in FAMILY_KEYS:
        raise ExpressionFormatError(f"鍵超出範圍：{text}")
    return i, j


def beta_form():
    """y 方向的 C，與 𝔐₁₄ 的 β 區塊相同"""
    g = m14_form()
    return g.restrict(BETA)


@dataclass(frozen=True, eq=False)
class PhiFamily:
    """φ_{i,j}：以自身引數 Var(1) 寫成的單變數函數，使用時代入 x_i"""
    phi: dict

    def __post_init__(self):
        missing = [k for k in FAMILY_KEYS if k not in self.phi]
        if missing:
            raise ExpressionFormatError(f"PhiFamily 缺少 φ：{missing}")
        for key, f in self.phi.items():
            if f.variables() - {1}:
                raise ExpressionFormatError(f"φ{key} 必須是單變數函數（只能用 var 1）")

    def __getitem__(self, key):
        return self.phi[key]

    def derivative(self, key, order=1):
        f = self.phi[key]
        for _ in range(order):
            f = f.diff(1)
        return f

    def at(self, key):
        """φ_{i,j}(x_i)"""
        return compose(self.phi[key], [var(key[0])])

    def reciprocity_residuals(self, samples=RECIPROCITY_SAMPLES):
        """φ_{i,1}′·φ_{i,2}′ − 1 在取樣點上的值"""
        out = []
        for i in (1, 2, 3):
            d1, d2 = self.derivative((i, 1)), self.derivative((i, 2))
            for t in samples:
                try:
                    value = float(d1.evaluate([t])) * float(d2.evaluate([t])) - 1.0
                except JacobiTsankovError:
                    continue
                out.append((i, t, value))
        return out

    def check(self, tol=1e-9):
        for i, t, value in self.reciprocity_residuals():
            if abs(value) > tol:
                raise HypothesisError(f"φ_{i},1′·φ_{i},2′ 在 t={t} 為 {value + 1}，不是 1")

    def is_transcendental(self):
        return any(f.is_transcendental() for f in self.phi.values())

    def to_dict(self):
        return {'phi': {f"{i},{j}": self.phi[(i, j)].to_dict() for i, j in FAMILY_KEYS}}

    @classmethod
    def from_dict(cls, data):
        raw = data.get('phi') if isinstance(data, dict) else None
        if not isinstance(raw, dict):
            raise ExpressionFormatError("PhiFamily JSON 需要 'phi' 物件")
        return cls({_key(k): expr_from_dict(v) for k, v in raw.items()})

    @classmethod
    def identity(cls):
        return cls({key: var(1) for key in FAMILY_KEYS})


@dataclass(frozen=True)
class AFamily:
    """常數 a_{i,j}"""
    a: dict

    def __post_init__(self):
        missing = [k for k in FAMILY_KEYS if k not in self.a]
        if missing:
            raise ExpressionFormatError(f"AFamily 缺少 a：{missing}")

    def __getitem__(self, key):
        return self.a[key]

    def to_dict(self):
        return {'a': {f"{i},{j}": scalar_to_json(self.a[(i, j)]) for i, j in FAMILY_KEYS}}

    @classmethod
    def from_dict(cls, data, ctx=RATIONAL_CONTEXT):
        raw = data.get('a') if isinstance(data, dict) else None
        if not isinstance(raw, dict):
            raise ExpressionFormatError("AFamily JSON 需要 'a' 物件")
        return cls({_key(k): ctx.coerce(scalar_from_json(v)) for k, v in raw.items()})

    @classmethod
    def constant(cls, value):
        return cls({key: value for key in FAMILY_KEYS})


def _psi_table(a, b, entries):
    psi = {}
    for (i, j), comps in entries.items():
        vec = [ZERO] * b
        for key, f in comps.items():
            vec[Y[key]] = f
        psi[(i - 1, j - 1)] = vec
    return psi


def build_M_Phi(family: PhiFamily, check: bool = True) -> PlaneWaveMetric:
    """𝓜_Φ：ψ 由 g_Φ 的分量讀出，混合項平均分給 (i,j) 與 (j,i)"""
    if check:
        family.check()
    x = {i: var(i) for i in (1, 2, 3)}
    half = Fraction(1, 2)
    entries = {
        (1, 1): {(2, 1): -family.at((2, 1)), (3, 1): -family.at((3, 1))},
        (2, 2): {(3, 2): -family.at((3, 2)), (1, 2): -family.at((1, 2))},
        (3, 3): {(1, 1): -family.at((1, 1)), (2, 2): -family.at((2, 2))},
        (2, 3): {(4, 1): half * x[1]},
        (1, 3): {(4, 2): half * x[2]},
    }
    metric = PlaneWaveMetric(3, 8, beta_form(), _psi_table(3, 8, entries), family, 'm-phi')
    logger.debug("建構 M_Phi 完成")
    return metric


def build_M_A(family: AFamily) -> PlaneWaveMetric:
    """𝓜_A：ψ 為 x 的一次式"""
    a = family.a
    x = {i: var(i) for i in (1, 2, 3)}
    half = Fraction(1, 2)
    entries = {
        (1, 1): {(2, 1): -a[(2, 1)] * x[2], (3, 1): -a[(3, 1)] * x[3]},
        (2, 2): {(3, 2): -a[(3, 2)] * x[3], (1, 2): -a[(1, 2)] * x[1]},
        (3, 3): {(1, 1): -a[(1, 1)] * x[1], (2, 2): -a[(2, 2)] * x[2]},
        (1, 2): {(2, 1): (1 - a[(2, 1)]) * x[1], (1, 2): (1 - a[(1, 2)]) * x[2]},
        (2, 3): {(4, 1): half * x[1], (3, 2): (1 - a[(3, 2)]) * x[2], (2, 2): (1 - a[(2, 2)]) * x[3]},
        (1, 3): {(4, 2): half * x[2], (3, 1): (1 - a[(3, 1)]) * x[1], (1, 1): (1 - a[(1, 1)]) * x[3]},
    }
    metric = PlaneWaveMetric(3, 8, beta_form(), _psi_table(3, 8, entries), family, 'm-a')
    logger.debug("建構 M_A 完成")
    return metric


def flat_metric(a=3, b=8) -> PlaneWaveMetric:
    """ψ ≡ 0"""
    C = beta_form() if b == 8 else BilinearForm.identity(b)
    return PlaneWaveMetric(a, b, C, {}, None, 'flat')


@dataclass(frozen=True)
class XiValue:
    """Ξ 在一點的值；quotients 為組成公式的兩個 ∇²R/(∇R)² 商"""
    value: object
    x1: object
    mode: str
    quotients: tuple = ()
    frame: object = None

    def to_dict(self):
        data = {
            'x1': scalar_to_json(self.x1),
            'mode': self.mode,
            'value': scalar_to_json(self.value),
            'quotients': [scalar_to_json(q) for q in self.quotients],
        }
        if self.frame is not None:
            data['frame'] = self.frame.to_dict()
        return data
