import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from src.models import ExpressionFormatError
from src.models.forms import BilinearForm, invert_form
from src.models.scalar import RATIONAL_CONTEXT, ScalarContext, scalar_from_json, scalar_to_json

logger = logging.getLogger(__name__)

# 𝔐₁₄ 的基底順序；α_i* 以 "a1*" 表示，β_{i,j} 以 "bij" 表示
M14_LABELS = (
    'a1', 'a2', 'a3', 'a1*', 'a2*', 'a3*',
    'b11', 'b12', 'b21', 'b22', 'b31', 'b32', 'b41', 'b42',
)
ALPHA = (0, 1, 2)
ALPHA_STAR = (3, 4, 5)
BETA = tuple(range(6, 14))

# (i,j,k,l) 在曲率對稱群下的 8 個像與對應符號
_ORBIT = (
    (lambda i, j, k, l: (i, j, k, l), 1),
    (lambda i, j, k, l: (j, i, k, l), -1),
    (lambda i, j, k, l: (i, j, l, k), -1),
    (lambda i, j, k, l: (j, i, l, k), 1),
    (lambda i, j, k, l: (k, l, i, j), 1),
    (lambda i, j, k, l: (l, k, i, j), -1),
    (lambda i, j, k, l: (k, l, j, i), -1),
    (lambda i, j, k, l: (l, k, j, i), 1),
)


def canonical_index(idx):
    """回傳 (代表元, 符號)；軌道中字典序最小者為代表元，必為零的索引回傳 (None, 0)"""
    i, j, k, l = idx
    if i == j or k == l:
        return None, 0
    return min((f(i, j, k, l), s) for f, s in _ORBIT)


def orbit(idx):
    i, j, k, l = idx
    return {f(i, j, k, l): s for f, s in _ORBIT}


class CurvatureTensor:
    """以對稱軌道代表元稀疏儲存的 4 階張量

    entries 只存代表元；查詢時套用對稱符號。由分量建構時若同一軌道
    出現互相矛盾的值，或 A(i,i,·,·) 類分量非零，會記在 violations 中。
    """

    def __init__(self, dim: int, entries=None, violations=()):
        self.dim = dim
        self.entries = {k: v for k, v in (entries or {}).items() if v != 0}
        self.violations = tuple(violations)

    @classmethod
    def from_components(cls, dim, items):
        entries = {}
        seen = {}
        violations = []
        for idx, value in items:
            idx = tuple(idx)
            if len(idx) != 4 or any(not 0 <= i < dim for i in idx):
                raise ExpressionFormatError(f"張量索引超出範圍：{idx}")
            key, sign = canonical_index(idx)
            if key is None:
                if value != 0:
                    violations.append({'idx': idx, 'reason': 'pair-antisymmetry'})
                continue
            implied = sign * value
            if key in seen and seen[key] != implied:
                violations.append({'idx': idx, 'reason': 'inconsistent-orbit', 'orbit': key})
                continue
            seen[key] = implied
            entries[key] = implied
        return cls(dim, entries, violations)

    @classmethod
    def zero(cls, dim):
        return cls(dim, {})

    def __call__(self, i, j, k, l):
        key, sign = canonical_index((i, j, k, l))
        if key is None:
            return 0
        value = self.entries.get(key, 0)
        return sign * value if value else 0

    @cached_property
    def components(self):
        """展開後的全部非零分量 {(i,j,k,l): value}"""
        full = {}
        for key, value in self.entries.items():
            for idx, sign in orbit(key).items():
                full[idx] = sign * value
        return full

    def is_zero(self, ctx=RATIONAL_CONTEXT):
        return all(ctx.is_zero(v) for v in self.entries.values())

    def evaluate(self, x, y, z, w):
        """多線性求值 A(x, y, z, w)"""
        total = Fraction(0)
        for (i, j, k, l), v in self.components.items():
            if x[i] and y[j] and z[k] and w[l]:
                total += v * x[i] * y[j] * z[k] * w[l]
        return total

    def lower_apply(self, x, y, z):
        """回傳向量 a，a_w = A(x, y, z, e_w)"""
        a = [Fraction(0)] * self.dim
        for (i, j, k, l), v in self.components.items():
            if x[i] and y[j] and z[k]:
                a[l] += v * x[i] * y[j] * z[k]
        return a

    def equals(self, other, ctx=RATIONAL_CONTEXT):
        if self.dim != other.dim:
            return False
        keys = set(self.entries) | set(other.entries)
        return all(ctx.equal(self.entries.get(k, 0), other.entries.get(k, 0)) for k in keys)

    def mismatches(self, other, ctx=RATIONAL_CONTEXT):
        keys = sorted(set(self.entries) | set(other.entries))
        return [(k, self.entries.get(k, 0), other.entries.get(k, 0)) for k in keys
                if not ctx.equal(self.entries.get(k, 0), other.entries.get(k, 0))]

    def to_dict(self):
        return [
            {'idx': [i + 1 for i in key], 'val': scalar_to_json(value)}
            for key, value in sorted(self.entries.items())
        ]

    @classmethod
    def from_dict(cls, dim, data):
        if not isinstance(data, list):
            raise ExpressionFormatError("tensor 必須是 {idx, val} 物件的陣列")
        items = []
        for entry in data:
            try:
                idx = [int(i) - 1 for i in entry['idx']]
                value = scalar_from_json(entry['val'])
            except (KeyError, TypeError, ValueError) as e:
                raise ExpressionFormatError(f"tensor 分量格式錯誤：{entry}") from e
            items.append((idx, value))
        return cls.from_components(dim, items)


@dataclass(frozen=True, eq=False)
class Model0:
    """0-模型 (V, ⟨·,·⟩, A)"""
    form: BilinearForm
    tensor: CurvatureTensor
    labels: tuple = None
    ctx: ScalarContext = field(default=RATIONAL_CONTEXT)

    def __post_init__(self):
        if self.tensor.dim != self.form.dim:
            raise ExpressionFormatError(
                f"form 維度 {self.form.dim} 與 tensor 維度 {self.tensor.dim} 不符")
        if self.labels is not None:
            if len(self.labels) != self.form.dim:
                raise ExpressionFormatError("labels 數量與維度不符")
            object.__setattr__(self, 'labels', tuple(self.labels))

    @property
    def dim(self):
        return self.form.dim

    @cached_property
    def form_inverse(self):
        return invert_form(self.form, self.ctx).entries

    def label(self, i):
        if self.labels is None:
            return str(i + 1)
        return self.labels[i]

    def index(self, label):
        if isinstance(label, int):
            return label
        if self.labels is not None and label in self.labels:
            return self.labels.index(label)
        try:
            return int(label) - 1
        except ValueError:
            raise ExpressionFormatError(f"未知的基底標籤：{label}") from None

    def basis_vector(self, label):
        v = [self.ctx.zero()] * self.dim
        v[self.index(label)] = self.ctx.one()
        return v

    def raise_index(self, a):
        """由 a_w = ⟨v, e_w⟩ 還原 v = G⁻¹ a"""
        ginv = self.form_inverse
        nz = [(w, x) for w, x in enumerate(a) if x != 0]
        return [sum((ginv[r][w] * x for w, x in nz), self.ctx.zero()) for r in range(self.dim)]

    def skew_apply(self, x, y, z):
        """𝒜(x, y) z，其中 ⟨𝒜(x,y)z, w⟩ = A(x,y,z,w)"""
        return self.raise_index(self.tensor.lower_apply(x, y, z))

    def to_dict(self):
        data = {'dim': self.dim, 'form': self.form.to_dict(), 'tensor': self.tensor.to_dict()}
        if self.labels is not None:
            data['labels'] = {str(i + 1): lab for i, lab in enumerate(self.labels)}
        return data

    @classmethod
    def from_dict(cls, data, ctx=RATIONAL_CONTEXT):
        try:
            dim = int(data['dim'])
            form = BilinearForm.from_dict(data['form'])
            tensor = CurvatureTensor.from_dict(dim, data.get('tensor', []))
        except (KeyError, TypeError, ValueError) as e:
            raise ExpressionFormatError(f"Model0 JSON 格式錯誤：{e}") from e
        labels = data.get('labels')
        if isinstance(labels, dict):
            labels = [labels.get(str(i + 1), str(i + 1)) for i in range(dim)]
        if not ctx.exact:
            form = BilinearForm([[float(v) for v in row] for row in form.entries])
            tensor = CurvatureTensor(dim, {k: float(v) for k, v in tensor.entries.items()},
                                     tensor.violations)
        return cls(form, tensor, labels, ctx)


def zero_model(dim, ctx=RATIONAL_CONTEXT):
    return Model0(BilinearForm.identity(dim), CurvatureTensor.zero(dim), None, ctx)


def m14_form():
    """𝔐₁₄ 的內積"""
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    g = [[Fraction(0)] * 14 for _ in range(14)]
    for i in range(3):
        g[ALPHA[i]][ALPHA_STAR[i]] = g[ALPHA_STAR[i]][ALPHA[i]] = Fraction(1)
        b1, b2 = BETA[2 * i], BETA[2 * i + 1]
        g[b1][b2] = g[b2][b1] = Fraction(1)
    b41, b42 = BETA[6], BETA[7]
    g[b41][b41] = g[b42][b42] = -half
    g[b41][b42] = g[b42][b41] = quarter
    return BilinearForm(g)


def _ix(label):
    return M14_LABELS.index(label)


M14_TENSOR_ENTRIES = (
    (('a2', 'a1', 'a1', 'b21'), Fraction(1)),
    (('a3', 'a1', 'a1', 'b31'), Fraction(1)),
    (('a3', 'a2', 'a2', 'b32'), Fraction(1)),
    (('a1', 'a2', 'a2', 'b12'), Fraction(1)),
    (('a1', 'a3', 'a3', 'b11'), Fraction(1)),
    (('a2', 'a3', 'a3', 'b22'), Fraction(1)),
    (('a1', 'a2', 'a3', 'b41'), Fraction(-1, 2)),
    (('a1', 'a3', 'a2', 'b41'), Fraction(-1, 2)),
    (('a2', 'a3', 'a1', 'b42'), Fraction(-1, 2)),
    (('a2', 'a1', 'a3', 'b42'), Fraction(-1, 2)),
)


def m14_tensor():
    return CurvatureTensor.from_components(
        14, [(tuple(_ix(s) for s in idx), value) for idx, value in M14_TENSOR_ENTRIES])


def build_M14():
    """建構 14 維模型 𝔐₁₄"""
    model = Model0(m14_form(), m14_tensor(), M14_LABELS)
    logger.debug(f"建構 M14：{len(model.tensor.entries)} 個軌道代表元")
    return model
