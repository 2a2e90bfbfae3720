import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from src.models import ArityError, ExpressionFormatError
from src.models.curvature import M14_LABELS
from src.models.expr import ZERO, expr_from_dict
from src.models.forms import BilinearForm, invert_form
from src.models.scalar import FLOAT_CONTEXT, RATIONAL_CONTEXT, scalar_from_json, scalar_to_json
from src.utils import linalg

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PlaneWaveMetric:
    """廣義平面波度量

    座標順序為 (x₁..x_a, x₁*..x_a*, y₁..y_b)；psi[(i, j)] 為長度 b 的 FnExpr 向量，
    只存 i ≤ j（0 起算），其中的 Var(k) 代表 x_k。
    """
    a: int
    b: int
    C: BilinearForm
    psi: dict
    family: object = None
    name: str = 'metric'

    def __post_init__(self):
        if self.a < 1 or self.b < 0:
            raise ExpressionFormatError(f"維度不合法：a={self.a}, b={self.b}")
        if self.C.dim != self.b:
            raise ExpressionFormatError(f"C 必須是 {self.b}×{self.b}")
        psi = {}
        for (i, j), vec in self.psi.items():
            if not (0 <= i < self.a and 0 <= j < self.a):
                raise ExpressionFormatError(f"psi 索引超出範圍：({i + 1}, {j + 1})")
            vec = tuple(vec)
            if len(vec) != self.b:
                raise ExpressionFormatError(f"psi({i + 1},{j + 1}) 需要 {self.b} 個分量")
            for f in vec:
                if any(k > self.a for k in f.variables()):
                    raise ExpressionFormatError(f"psi 只能依賴 x₁..x_{self.a}：{f}")
            key = (min(i, j), max(i, j))
            if key in psi and psi[key] != vec:
                raise ExpressionFormatError(f"psi 不對稱：({i + 1}, {j + 1})")
            psi[key] = vec
        object.__setattr__(self, 'psi', psi)

    @property
    def dim(self):
        return 2 * self.a + self.b

    def x_index(self, i):
        return i

    def xstar_index(self, i):
        return self.a + i

    def y_index(self, mu):
        return 2 * self.a + mu

    def coordinate_labels(self):
        return ([f"x{i + 1}" for i in range(self.a)] + [f"x*{i + 1}" for i in range(self.a)]
                + [f"y{mu + 1}" for mu in range(self.b)])

    def psi_vector(self, i, j):
        return self.psi.get((min(i, j), max(i, j)), (ZERO,) * self.b)

    def psi_entries(self):
        """列出所有非零的 (i, j, μ, FnExpr)，含 i > j 的對稱項"""
        out = []
        for (i, j), vec in self.psi.items():
            for mu, f in enumerate(vec):
                if f == ZERO:
                    continue
                out.append((i, j, mu, f))
                if i != j:
                    out.append((j, i, mu, f))
        return out

    @cached_property
    def C_inverse(self):
        exact = not any(isinstance(v, float) for row in self.C.entries for v in row)
        return invert_form(self.C, RATIONAL_CONTEXT if exact else FLOAT_CONTEXT).entries

    def is_transcendental(self):
        return any(f.is_transcendental() for _, _, _, f in self.psi_entries())

    def max_degree(self):
        """ψ 的最高多項式次數；含非多項式分量時回傳 None"""
        degrees = [f.degree() for _, _, _, f in self.psi_entries()]
        if None in degrees:
            return None
        return max(degrees, default=0)

    def to_dict(self):
        return {
            'a': self.a,
            'b': self.b,
            'C': self.C.to_dict(),
            'psi': {f"{i + 1},{j + 1}": [f.to_dict() for f in vec] for (i, j), vec in sorted(self.psi.items())},
        }

    @classmethod
    def from_dict(cls, data, name='metric'):
        try:
            a, b = int(data['a']), int(data['b'])
            C = BilinearForm.from_dict(data['C']) if b else None
            raw = data.get('psi', {})
        except (KeyError, TypeError, ValueError) as e:
            raise ExpressionFormatError(f"度量 JSON 格式錯誤：{e}") from e
        psi = {}
        for key, vec in raw.items():
            try:
                i, j = (int(s) - 1 for s in key.split(','))
            except ValueError:
                raise ExpressionFormatError(f"psi 鍵必須是 'i,j'：{key}") from None
            psi[(i, j)] = [expr_from_dict(f) for f in vec]
        if C is None:
            raise ExpressionFormatError("b = 0 的度量不在支援範圍")
        return cls(a, b, C, psi, name=name)


@dataclass(frozen=True)
class Point:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, 'coords', tuple(self.coords))

    @classmethod
    def from_parts(cls, x, xstar, y):
        return cls(tuple(x) + tuple(xstar) + tuple(y))

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def x(self, a):
        return self.coords[:a]

    def xstar(self, a):
        return self.coords[a:2 * a]

    def y(self, a):
        return self.coords[2 * a:]

    def to_dict(self):
        return [scalar_to_json(v) for v in self.coords]

    @classmethod
    def from_dict(cls, data, ctx=RATIONAL_CONTEXT):
        return cls([ctx.coerce(scalar_from_json(v)) for v in data])


@dataclass
class CoordTensor:
    """座標基底下的張量分量；前 covariant 個槽為協變槽，後 derivative 個為微分槽"""
    dim: int
    covariant: int
    derivative: int = 0
    components: dict = field(default_factory=dict)

    @property
    def rank(self):
        return self.covariant + self.derivative

    def __call__(self, *idx):
        if len(idx) != self.rank:
            raise ArityError(f"需要 {self.rank} 個索引，得到 {len(idx)}")
        return self.components.get(tuple(idx), 0)

    def nonzero(self, ctx=RATIONAL_CONTEXT):
        return {k: v for k, v in self.components.items() if not ctx.is_zero(v)}

    def is_zero(self, ctx=RATIONAL_CONTEXT):
        return not self.nonzero(ctx)

    def max_abs(self):
        return max((abs(v) for v in self.components.values()), default=0)

    def to_dict(self, labels=None):
        def name(i):
            return labels[i] if labels else i + 1
        return {
            'valence': [self.covariant, self.derivative],
            'components': [
                {'idx': [name(i) for i in key], 'val': scalar_to_json(v)}
                for key, v in sorted(self.components.items()) if v != 0
            ],
        }


@dataclass
class Frame:
    """一點切空間中的有序基底；vectors[r] 是角色 roles[r] 的座標分量"""
    point: Point
    vectors: list
    roles: tuple = M14_LABELS
    stages: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.vectors) != len(self.roles):
            raise ArityError(f"frame 有 {len(self.vectors)} 個向量，但有 {len(self.roles)} 個角色")

    @property
    def size(self):
        return len(self.vectors)

    def vector(self, role):
        if isinstance(role, int):
            return self.vectors[role]
        return self.vectors[self.roles.index(role)]

    def matrix(self):
        """以 frame 向量為行的矩陣"""
        return linalg.transpose(self.vectors)

    def is_independent(self, ctx=RATIONAL_CONTEXT):
        return len(self.vectors) == len(self.vectors[0]) and \
            not ctx.is_zero(linalg.determinant(self.matrix(), ctx))

    def replaced(self, role, vector):
        vectors = list(self.vectors)
        vectors[self.roles.index(role)] = list(vector)
        return Frame(self.point, vectors, self.roles, dict(self.stages))

    def to_dict(self):
        return {
            'point': self.point.to_dict(),
            'vectors': {role: [scalar_to_json(v) for v in vec] for role, vec in zip(self.roles, self.vectors)},
        }


def coordinate_frame(metric: PlaneWaveMetric, point: Point):
    n = metric.dim
    one = 1.0 if any(isinstance(v, float) for v in point.coords) else Fraction(1)
    vectors = [[one if r == c else one - one for r in range(n)] for c in range(n)]
    return Frame(point, vectors, tuple(metric.coordinate_labels()))
