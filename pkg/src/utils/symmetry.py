import logging
from dataclasses import dataclass
from fractions import Fraction

from src.models import ConstraintError, ExpressionFormatError, SingularMapError
from src.models.curvature import ALPHA, ALPHA_STAR, BETA, CurvatureTensor, Model0, canonical_index
from src.models.forms import BilinearForm
from src.models.operators import LinearMap
from src.models.reports import CheckReport, Witness
from src.models.scalar import RATIONAL_CONTEXT, scalar_from_json, scalar_to_json
from src.utils import linalg
from src.utils.checks import invariant_spans
from src.utils.sampling import random_fraction

logger = logging.getLogger(__name__)

# α 四元組（1 起算），T 保持 A 在這六個分量上的值即等價於 b 的六條線性方程
KERNEL_TUPLES = ((2, 1, 1, 2), (3, 1, 1, 3), (3, 2, 2, 3), (2, 1, 1, 3), (1, 2, 2, 3), (1, 3, 3, 2))
N_BETA = len(BETA)


def pullback(t: LinearMap, m: Model0) -> Model0:
    """回傳 (V, T*⟨·,·⟩, T*A)"""
    ctx = m.ctx
    t.check_invertible(ctx)
    rows = t.rows
    form = BilinearForm(linalg.mat_mul(linalg.transpose(rows), linalg.mat_mul(m.form.entries, rows)))

    # 逐一收縮四個槽：A'(…, e_j, …) = Σ_a T[a][j] A(…, e_a, …)
    nz_rows = [[(j, v) for j, v in enumerate(row) if v != 0] for row in rows]
    current = dict(m.tensor.components)
    for slot in range(4):
        nxt = {}
        for idx, value in current.items():
            for j, x in nz_rows[idx[slot]]:
                key = idx[:slot] + (j,) + idx[slot + 1:]
                nxt[key] = nxt.get(key, 0) + value * x
        current = {k: v for k, v in nxt.items() if v != 0}
    entries = {k: v for k, v in current.items() if canonical_index(k)[0] == k}
    logger.debug(f"pullback 完成：{len(entries)} 個軌道代表元")
    return Model0(form, CurvatureTensor(m.dim, entries), m.labels, ctx)


def _contained(t, subspace, ctx):
    for row in subspace.basis:
        if linalg.span_coordinates(subspace.basis, subspace.pivots, t.apply(row), ctx) is None:
            return False
    return True


def is_symmetry(t: LinearMap, m: Model0, spans=None) -> CheckReport:
    """T ∈ 𝒢(m) 若且唯若 T*⟨·,·⟩ = ⟨·,·⟩ 且 T*A = A"""
    ctx = m.ctx
    pulled = pullback(t, m)
    mismatches = []
    n = m.dim
    for i in range(n):
        for j in range(i, n):
            if not ctx.equal(pulled.form[i, j], m.form[i, j]):
                mismatches.append({'where': 'form', 'idx': [i + 1, j + 1],
                                   'expected': m.form[i, j], 'actual': pulled.form[i, j]})
    for key, expected, actual in m.tensor.mismatches(pulled.tensor, ctx):
        mismatches.append({'where': 'tensor', 'idx': [k + 1 for k in key],
                           'expected': expected, 'actual': actual})

    big, small = spans or invariant_spans(m)
    details = {
        'preserves_V_alpha_star': _contained(t, small, ctx),
        'preserves_V_beta_alpha_star': _contained(t, big, ctx),
    }
    witness = None
    if mismatches:
        first = mismatches[0]
        kind = 'G' if first['where'] == 'form' else 'A'
        witness = Witness(f"{first['where']}-entry", ((kind, tuple(i - 1 for i in first['idx'])),),
                          note=f"expected {first['expected']}, got {first['actual']}")
        logger.info(f"不是對稱：{len(mismatches)} 個分量不符")
    return CheckReport('is-symmetry', not mismatches, witness,
                       stats={'mismatched_entries': len(mismatches)},
                       mismatches=mismatches, details=details, labels=m.labels)


def tau(t: LinearMap, m: Model0, spans=None):
    """T 在 V_{α*} 上的限制，以 V_{α*} 的 RREF 基底表示"""
    ctx = m.ctx
    _, small = spans or invariant_spans(m)
    columns = []
    for row in small.basis:
        coords = linalg.span_coordinates(small.basis, small.pivots, t.apply(row), ctx)
        if coords is None:
            raise ConstraintError("T 不保持 V_{α*}，τ 無定義")
        columns.append(coords)
    return linalg.transpose(columns) if columns else []


def compose(*maps):
    result = maps[0]
    for t in maps[1:]:
        result = result @ t
    return result


# 生成元

@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: tuple = ()

    def to_dict(self):
        return {'kind': self.kind, 'params': [scalar_to_json(p) for p in self.params]}


GENERATOR_KINDS = ('identity', 'swap12', 'swap13', 'swap23', 'rotation', 'dilatation')


def parse_generator(text, ctx=RATIONAL_CONTEXT) -> GeneratorSpec:
    """解析 'swap12'、'rotation:3/5,4/5'、'dilatation:2,1/2,1'"""
    if isinstance(text, dict):
        kind = text.get('kind')
        params = tuple(ctx.coerce(scalar_from_json(p)) for p in text.get('params', []))
    else:
        kind, _, rest = str(text).strip().partition(':')
        params = tuple(ctx.parse(p) for p in rest.split(',')) if rest else ()
    if kind not in GENERATOR_KINDS:
        raise ExpressionFormatError(f"未知的生成元：{kind}（可用：{', '.join(GENERATOR_KINDS)}）")
    expected = {'rotation': 2, 'dilatation': 3}.get(kind, 0)
    if len(params) != expected:
        raise ExpressionFormatError(f"{kind} 需要 {expected} 個參數，得到 {len(params)}")
    return GeneratorSpec(kind, params)


_L = {name: i for i, name in enumerate(
    ('a1', 'a2', 'a3', 'a1*', 'a2*', 'a3*', 'b11', 'b12', 'b21', 'b22', 'b31', 'b32', 'b41', 'b42'))}


def _images(table, ctx):
    """{來源標籤: {目標標籤: 係數}} 轉成 LinearMap"""
    images = {_L[src]: {_L[dst]: v for dst, v in image.items()} for src, image in table.items()}
    return LinearMap.from_images(images, 14, ctx)


def _swap(pairs, ctx, extra=None):
    one = ctx.one()
    table = {}
    for a, b in pairs:
        table[a] = {b: one}
        table[b] = {a: one}
    table.update(extra or {})
    return _images(table, ctx)


def swap12(ctx=RATIONAL_CONTEXT):
    return _swap([('a1', 'a2'), ('a1*', 'a2*'), ('b11', 'b22'), ('b12', 'b21'),
                  ('b31', 'b32'), ('b41', 'b42')], ctx)


def swap13(ctx=RATIONAL_CONTEXT):
    # β₄,₃ := −β₄,₁ − β₄,₂；交換 1、3 時 β₄,₁ ↔ β₄,₃，β₄,₂ 不動
    one = ctx.one()
    return _swap([('a1', 'a3'), ('a1*', 'a3*'), ('b11', 'b31'), ('b12', 'b32'), ('b21', 'b22')], ctx,
                 {'b41': {'b41': -one, 'b42': -one}})


def swap23(ctx=RATIONAL_CONTEXT):
    s13 = swap13(ctx)
    return s13 @ swap12(ctx) @ s13


def rotation(c, s, ctx=RATIONAL_CONTEXT):
    """前兩個座標的旋轉；(c, s) 必須落在單位圓上"""
    if not ctx.equal(c * c + s * s, ctx.one()):
        raise ExpressionFormatError(f"rotation 參數需滿足 cos² + sin² = 1，得到 ({c}, {s})")
    half = ctx.one() / 2
    sc = s * c
    table = {
        'a1': {'a1': c, 'a2': s},
        'a2': {'a1': -s, 'a2': c},
        'a1*': {'a1*': c, 'a2*': s},
        'a2*': {'a1*': -s, 'a2*': c},
        'b11': {'b11': c, 'b22': s},
        'b12': {'b12': c, 'b21': s},
        'b21': {'b12': -s, 'b21': c},
        'b22': {'b11': -s, 'b22': c},
        # β₄,₃ = −β₄,₁ − β₄,₂ 展開後的結果
        'b31': {'b31': c * c, 'b32': s * s, 'b41': 2 * sc, 'b42': 2 * sc},
        'b32': {'b32': c * c, 'b31': s * s, 'b41': -2 * sc, 'b42': -2 * sc},
        'b41': {'b32': half * sc, 'b31': -half * sc, 'b42': -s * s, 'b41': c * c},
        'b42': {'b32': half * sc, 'b31': -half * sc, 'b42': c * c, 'b41': -s * s},
    }
    return _images(table, ctx)


def dilatation(a1, a2, a3, ctx=RATIONAL_CONTEXT):
    """對角伸縮；ε = sign(a₁a₂a₃)，|a₁a₂a₃| = 1 時為對稱"""
    if a1 == 0 or a2 == 0 or a3 == 0:
        raise SingularMapError(f"dilatation 參數不可為 0：({a1}, {a2}, {a3})")
    product = a1 * a2 * a3
    if not ctx.equal(abs(product), ctx.one()):
        logger.warning(f"dilatation 參數乘積為 {product}，不是 ±1，結果不會是對稱")
    eps = ctx.one() if product > 0 else -ctx.one()
    one = ctx.one()
    table = {
        'a1': {'a1': a1}, 'a2': {'a2': a2}, 'a3': {'a3': a3},
        'a1*': {'a1*': one / a1}, 'a2*': {'a2*': one / a2}, 'a3*': {'a3*': one / a3},
        'b11': {'b11': eps * a2 / a3}, 'b12': {'b12': eps * a3 / a2},
        'b21': {'b21': eps * a3 / a1}, 'b22': {'b22': eps * a1 / a3},
        'b31': {'b31': eps * a2 / a1}, 'b32': {'b32': eps * a1 / a2},
        'b41': {'b41': eps}, 'b42': {'b42': eps},
    }
    return _images(table, ctx)


def build_generator(spec: GeneratorSpec, ctx=RATIONAL_CONTEXT) -> LinearMap:
    if spec.kind == 'identity':
        return LinearMap.identity(14, ctx)
    if spec.kind == 'swap12':
        return swap12(ctx)
    if spec.kind == 'swap13':
        return swap13(ctx)
    if spec.kind == 'swap23':
        return swap23(ctx)
    if spec.kind == 'rotation':
        return rotation(*spec.params, ctx=ctx)
    return dilatation(*spec.params, ctx=ctx)


# τ 的核

def _beta_block(m):
    return [[m.form[BETA[a], BETA[b]] for b in range(N_BETA)] for a in range(N_BETA)]


def kernel_constraints(m: Model0):
    """b_i^ν 必須滿足的六條線性方程的係數矩陣（6 × 24）

    第 (i-1)·8 + ν 行是 b_i^ν 的係數：把四元組中每個等於 α_i 的槽換成 β_ν 後的 A 值總和。
    """
    rows = []
    for tup in KERNEL_TUPLES:
        idx = [ALPHA[t - 1] for t in tup]
        row = [m.ctx.zero()] * (3 * N_BETA)
        for slot, i in enumerate(tup):
            for nu, beta in enumerate(BETA):
                replaced = list(idx)
                replaced[slot] = beta
                value = m.tensor(*replaced)
                if value != 0:
                    row[(i - 1) * N_BETA + nu] += value
        rows.append(row)
    return rows


def kernel_dimension(m: Model0):
    rank = linalg.rank(kernel_constraints(m), m.ctx)
    return 3 * N_BETA - rank + 3


@dataclass(frozen=True)
class KernelParams:
    """ker τ 的參數：b (3×8) 與反對稱矩陣 c 的上三角 (c₁₂, c₁₃, c₂₃)"""
    b: tuple
    c_antisym: tuple

    def __post_init__(self):
        b = tuple(tuple(row) for row in self.b)
        if len(b) != 3 or any(len(row) != N_BETA for row in b):
            raise ExpressionFormatError("KernelParams.b 必須是 3×8 矩陣")
        if len(self.c_antisym) != 3:
            raise ExpressionFormatError("KernelParams.c_antisym 必須有 3 個分量")
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'c_antisym', tuple(self.c_antisym))

    @classmethod
    def zero(cls, ctx=RATIONAL_CONTEXT):
        return cls([[ctx.zero()] * N_BETA for _ in range(3)], [ctx.zero()] * 3)

    @classmethod
    def from_vector(cls, vec, c_antisym):
        return cls([vec[i * N_BETA:(i + 1) * N_BETA] for i in range(3)], c_antisym)

    def vector(self):
        return [v for row in self.b for v in row]

    def residual(self, m):
        return linalg.mat_vec(kernel_constraints(m), self.vector())

    def to_dict(self):
        return {'b': [[scalar_to_json(v) for v in row] for row in self.b],
                'c': [scalar_to_json(v) for v in self.c_antisym]}

    @classmethod
    def from_dict(cls, data, ctx=RATIONAL_CONTEXT):
        try:
            b = [[ctx.coerce(scalar_from_json(v)) for v in row] for row in data['b']]
            c = [ctx.coerce(scalar_from_json(v)) for v in data.get('c', [0, 0, 0])]
        except (KeyError, TypeError) as e:
            raise ExpressionFormatError(f"KernelParams JSON 格式錯誤：{e}") from e
        return cls(b, c)


def kernel_element(p: KernelParams, m: Model0) -> LinearMap:
    """由 KernelParams 建構 τ(T) = I 的對稱 T"""
    ctx = m.ctx
    residual = p.residual(m)
    if any(not ctx.is_zero(r) for r in residual):
        raise ConstraintError(f"b 不滿足核方程，殘差 {residual}")
    cb = _beta_block(m)
    b = p.b
    # d_ν^i = −Σ_μ ⟨β_ν, β_μ⟩ b_i^μ
    d = [[-sum((cb[nu][mu] * b[i][mu] for mu in range(N_BETA)), ctx.zero())
          for i in range(3)] for nu in range(N_BETA)]
    c12, c13, c23 = p.c_antisym
    antisym = [[ctx.zero(), c12, c13], [-c12, ctx.zero(), c23], [-c13, -c23, ctx.zero()]]
    # 對稱部分由 ⟨Tα_i, Tα_j⟩ = 0 決定
    c = [[antisym[i][j] - linalg.dot(b[i], linalg.mat_vec(cb, b[j])) / 2 for j in range(3)]
         for i in range(3)]

    images = {}
    for i in range(3):
        image = {ALPHA[i]: ctx.one()}
        for nu in range(N_BETA):
            if b[i][nu] != 0:
                image[BETA[nu]] = b[i][nu]
        for j in range(3):
            if c[i][j] != 0:
                image[ALPHA_STAR[j]] = c[i][j]
        images[ALPHA[i]] = image
    for nu in range(N_BETA):
        image = {BETA[nu]: ctx.one()}
        for i in range(3):
            if d[nu][i] != 0:
                image[ALPHA_STAR[i]] = d[nu][i]
        images[BETA[nu]] = image
    return LinearMap.from_images(images, m.dim, ctx)


def random_kernel_params(rng, m: Model0) -> KernelParams:
    """在核方程的零空間中取隨機有理解"""
    ctx = m.ctx
    basis = linalg.nullspace(kernel_constraints(m), 3 * N_BETA, ctx)
    vec = [ctx.zero()] * (3 * N_BETA)
    for v in basis:
        coeff = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        if not ctx.exact:
            coeff = float(coeff)
        if coeff:
            vec = [x + coeff * y for x, y in zip(vec, v)]
    c_antisym = [random_fraction(rng, 2, 3) for _ in range(3)]
    if not ctx.exact:
        c_antisym = [float(x) for x in c_antisym]
    return KernelParams.from_vector(vec, c_antisym)
