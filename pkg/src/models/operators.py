import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property

from src.models import ArityError, SingularMapError
from src.models.scalar import RATIONAL_CONTEXT, scalar_to_json
from src.utils import linalg

logger = logging.getLogger(__name__)


class Operator:
    """V 上的線性算子，稀疏儲存 {(row, col): value}

    tag 記錄來源，例如 ('jacobi', x)、('skew', i, j)。
    """

    __slots__ = ('dim', 'entries', 'tag')

    def __init__(self, dim: int, entries, tag=()):
        self.dim = dim
        self.entries = {k: v for k, v in entries.items() if v != 0}
        self.tag = tag

    @classmethod
    def from_matrix(cls, rows, tag=()):
        n = len(rows)
        return cls(n, {(r, c): v for r, row in enumerate(rows) for c, v in enumerate(row)}, tag)

    def matrix(self, ctx=RATIONAL_CONTEXT):
        m = linalg.zeros(self.dim, self.dim, ctx.zero())
        for (r, c), v in self.entries.items():
            m[r][c] = v
        return m

    def column(self, c, ctx=RATIONAL_CONTEXT):
        v = [ctx.zero()] * self.dim
        for (r, col), x in self.entries.items():
            if col == c:
                v[r] = x
        return v

    def apply(self, v, ctx=RATIONAL_CONTEXT):
        if len(v) != self.dim:
            raise ArityError(f"向量長度 {len(v)} 與算子維度 {self.dim} 不符")
        out = [ctx.zero()] * self.dim
        for (r, c), x in self.entries.items():
            if v[c] != 0:
                out[r] += x * v[c]
        return out

    def __matmul__(self, other):
        by_row = defaultdict(list)
        for (k, c), y in other.entries.items():
            by_row[k].append((c, y))
        out = {}
        for (r, k), x in self.entries.items():
            for c, y in by_row.get(k, ()):
                out[(r, c)] = out.get((r, c), 0) + x * y
        return Operator(self.dim, out, ('product', self.tag, other.tag))

    def __add__(self, other):
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return Operator(self.dim, out, ('sum', self.tag, other.tag))

    def __neg__(self):
        return Operator(self.dim, {k: -v for k, v in self.entries.items()}, self.tag)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return Operator(self.dim, {k: v * s for k, v in self.entries.items()}, self.tag)

    __rmul__ = __mul__

    def is_zero(self, ctx=RATIONAL_CONTEXT):
        return all(ctx.is_zero(v) for v in self.entries.values())

    def nonzero_columns(self, ctx=RATIONAL_CONTEXT):
        return sorted({c for (_, c), v in self.entries.items() if not ctx.is_zero(v)})

    def _adjoint_defect(self, form, sign, ctx):
        # ⟨Mx, y⟩ = sign·⟨x, My⟩  ⇔  MᵀG = sign·GM
        m = self.matrix(ctx)
        g = form.entries
        left = linalg.mat_mul(linalg.transpose(m), g)
        right = linalg.mat_mul(g, m)
        return linalg.matrices_equal(left, [[sign * v for v in row] for row in right], ctx)

    def is_self_adjoint(self, form, ctx=RATIONAL_CONTEXT):
        return self._adjoint_defect(form, 1, ctx)

    def is_skew_adjoint(self, form, ctx=RATIONAL_CONTEXT):
        return self._adjoint_defect(form, -1, ctx)

    def to_dict(self, labels=None):
        def name(i):
            return labels[i] if labels else str(i + 1)
        return {
            'dim': self.dim,
            'entries': [
                {'row': name(r), 'col': name(c), 'val': scalar_to_json(v)}
                for (r, c), v in sorted(self.entries.items())
            ],
        }

    def __repr__(self):
        return f"Operator(dim={self.dim}, nnz={len(self.entries)}, tag={self.tag!r})"


def commutator(p: Operator, q: Operator) -> Operator:
    out = p @ q - q @ p
    out.tag = ('commutator', p.tag, q.tag)
    return out


@dataclass(frozen=True)
class LinearMap:
    """V 上的線性映射 T，矩陣第 j 行為 T e_j 的座標"""
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ArityError("LinearMap 必須是方陣")
        object.__setattr__(self, 'rows', rows)

    @classmethod
    def identity(cls, n, ctx=RATIONAL_CONTEXT):
        return cls(linalg.identity(n, ctx.one()))

    @classmethod
    def from_images(cls, images, n, ctx=RATIONAL_CONTEXT):
        """由 {j: T e_j 的稀疏座標 {i: v}} 建構；未列出的基底向量固定不動"""
        m = linalg.identity(n, ctx.one())
        for j, image in images.items():
            for i in range(n):
                m[i][j] = image.get(i, ctx.zero())
        return cls(m)

    @property
    def dim(self):
        return len(self.rows)

    def matrix(self):
        return [list(r) for r in self.rows]

    def image(self, j):
        return [row[j] for row in self.rows]

    def apply(self, v):
        return linalg.mat_vec(self.rows, v)

    def __matmul__(self, other):
        return LinearMap(linalg.mat_mul(self.rows, other.rows))

    def determinant(self, ctx=RATIONAL_CONTEXT):
        return linalg.determinant(self.rows, ctx)

    def inverse(self, ctx=RATIONAL_CONTEXT):
        return LinearMap(linalg.inverse(self.rows, ctx))

    def check_invertible(self, ctx=RATIONAL_CONTEXT):
        if ctx.is_zero(self.determinant(ctx)):
            raise SingularMapError("線性映射不可逆（行列式為 0）")

    def equals(self, other, ctx=RATIONAL_CONTEXT):
        return linalg.matrices_equal(self.rows, other.rows, ctx)

    def to_dict(self):
        return [[scalar_to_json(v) for v in row] for row in self.rows]


def _operator_from_lowered(m, lowered, tag):
    """lowered[(c, w)] = ⟨M e_c, e_w⟩，回傳 M = G⁻¹·lowered"""
    ginv = m.form_inverse
    raise_rows = defaultdict(list)
    for r in range(m.dim):
        for w, x in enumerate(ginv[r]):
            if x != 0:
                raise_rows[w].append((r, x))
    out = {}
    for (c, w), v in lowered.items():
        if v == 0:
            continue
        for r, x in raise_rows.get(w, ()):
            out[(r, c)] = out.get((r, c), 0) + x * v
    return Operator(m.dim, out, tag)


def skew(m, x, y) -> Operator:
    """𝒜(x, y)：z ↦ 𝒜(x, y) z"""
    lowered = {}
    for (i, j, k, l), v in m.tensor.components.items():
        if x[i] and y[j]:
            lowered[(k, l)] = lowered.get((k, l), 0) + v * x[i] * y[j]
    return _operator_from_lowered(m, lowered, ('skew', tuple(x), tuple(y)))


def jacobi_polarized(m, x, y) -> Operator:
    """𝒥(x, y) = ½(𝒜(·, x) y + 𝒜(·, y) x)"""
    lowered = {}
    for (c, j, k, l), v in m.tensor.components.items():
        coeff = x[j] * y[k] + y[j] * x[k]
        if coeff:
            lowered[(c, l)] = lowered.get((c, l), 0) + v * coeff / 2
    return _operator_from_lowered(m, lowered, ('jacobi_polarized', tuple(x), tuple(y)))


def jacobi(m, x) -> Operator:
    """𝒥(x)：y ↦ 𝒜(y, x) x"""
    op = jacobi_polarized(m, x, x)
    op.tag = ('jacobi', tuple(x))
    return op


def polarized_pairs(n):
    """基底配對的標準順序：先 (i, i)，再依字典序列出 i < j"""
    return [(i, i) for i in range(n)] + [(i, j) for i in range(n) for j in range(i + 1, n)]


def skew_pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


class BasisOperators:
    """一次算好所有基底算子 𝒥(e_i, e_j) 與 𝒜(e_i, e_j)"""

    def __init__(self, m):
        self.model = m
        self.n = m.dim
        # by_middle[(a, b)][(c, w)] = A(c, a, b, w)；by_front[(a, b)][(c, w)] = A(a, b, c, w)
        self._by_middle = defaultdict(dict)
        self._by_front = defaultdict(dict)
        for (i, j, k, l), v in m.tensor.components.items():
            self._by_middle[(j, k)][(i, l)] = v
            self._by_front[(i, j)][(k, l)] = v

    @cached_property
    def jacobi(self):
        ops = {}
        for i, j in polarized_pairs(self.n):
            lowered = dict(self._by_middle.get((i, j), {}))
            for key, v in self._by_middle.get((j, i), {}).items():
                lowered[key] = lowered.get(key, 0) + v
            lowered = {k: v / 2 for k, v in lowered.items()}
            ops[(i, j)] = _operator_from_lowered(self.model, lowered, ('jacobi_polarized', i, j))
        logger.debug(f"建立 {len(ops)} 個極化 Jacobi 基底算子")
        return ops

    @cached_property
    def skew(self):
        ops = {}
        for i, j in skew_pairs(self.n):
            ops[(i, j)] = _operator_from_lowered(
                self.model, self._by_front.get((i, j), {}), ('skew', i, j))
        logger.debug(f"建立 {len(ops)} 個 skew 基底算子")
        return ops

    def jacobi_at(self, i, j):
        return self.jacobi[(i, j) if i <= j else (j, i)]
