import logging
from fractions import Fraction

from src.models import ConstraintError, SingularMapError
from src.models.scalar import RATIONAL_CONTEXT

logger = logging.getLogger(__name__)

# 矩陣一律以列的串列表示；有理數模式下所有運算皆為精確運算


def identity(n, one=Fraction(1)):
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def zeros(rows, cols, zero=Fraction(0)):
    return [[zero] * cols for _ in range(rows)]


def copy_matrix(m):
    return [list(row) for row in m]


def transpose(m):
    return [list(col) for col in zip(*m)]


def dot(u, v):
    total = 0
    for a, b in zip(u, v):
        if a != 0 and b != 0:
            total += a * b
    return Fraction(total) if isinstance(total, int) else total


def mat_vec(m, v):
    nz = [(j, x) for j, x in enumerate(v) if x != 0]
    zero = Fraction(0) if not any(isinstance(x, float) for _, x in nz) else 0.0
    return [sum((row[j] * x for j, x in nz), zero) for row in m]


def mat_mul(a, b):
    """稀疏友善的乘法：略過左矩陣中的零元素"""
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [0] * cols
        for k, x in enumerate(row):
            if x == 0:
                continue
            for j, y in enumerate(b[k]):
                if y != 0:
                    acc[j] += x * y
        out.append([Fraction(v) if isinstance(v, int) else v for v in acc])
    return out


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, s):
    return [[x * s for x in row] for row in a]


def matrices_equal(a, b, ctx=RATIONAL_CONTEXT):
    if len(a) != len(b):
        return False
    for ra, rb in zip(a, b):
        if len(ra) != len(rb):
            return False
        if any(not ctx.equal(x, y) for x, y in zip(ra, rb)):
            return False
    return True


def _pick_pivot(m, col, start, ctx):
    if ctx.exact:
        for r in range(start, len(m)):
            if m[r][col] != 0:
                return r
        return None
    best, best_abs = None, ctx.tol
    for r in range(start, len(m)):
        size = abs(m[r][col])
        if size > best_abs:
            best, best_abs = r, size
    return best


def row_reduce(rows, ctx=RATIONAL_CONTEXT, augment=None):
    """化為簡化列梯形 (RREF)

    回傳 (rref, pivots, augment)；rref 只保留非零列。augment 若給定，
    會跟著做相同的列運算，用來解 Ax = b。
    """
    m = copy_matrix(rows)
    t = list(augment) if augment is not None else None
    if not m:
        return [], [], t
    n_cols = len(m[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        if r >= len(m):
            break
        p = _pick_pivot(m, c, r, ctx)
        if p is None:
            continue
        if p != r:
            m[r], m[p] = m[p], m[r]
            if t is not None:
                t[r], t[p] = t[p], t[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        if t is not None:
            t[r] = t[r] / piv
        for i in range(len(m)):
            if i == r:
                continue
            f = m[i][c]
            if ctx.is_zero(f):
                continue
            m[i] = [x - f * y for x, y in zip(m[i], m[r])]
            if t is not None:
                t[i] = t[i] - f * t[r]
        pivots.append(c)
        r += 1
    if t is not None:
        for i in range(r, len(m)):
            if not ctx.is_zero(t[i]):
                raise ConstraintError(f"線性系統無解：第 {i} 列殘差 {t[i]}")
        t = t[:r]
    return m[:r], pivots, t


def rank(rows, ctx=RATIONAL_CONTEXT):
    return len(row_reduce(rows, ctx)[1])


def nullspace(rows, n_cols, ctx=RATIONAL_CONTEXT):
    """零空間的一組基底（每個自由變數一個向量）"""
    if not rows:
        return identity(n_cols)
    rref, pivots, _ = row_reduce(rows, ctx)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0) if ctx.exact else 0.0] * n_cols
        v[f] = ctx.one()
        for row, p in zip(rref, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(rows, rhs, ctx=RATIONAL_CONTEXT):
    """回傳 Ax = b 的一個特解（自由變數取 0）；無解時拋出 ConstraintError"""
    n_cols = len(rows[0]) if rows else 0
    rref, pivots, t = row_reduce(rows, ctx, augment=rhs)
    x = [ctx.zero()] * n_cols
    for value, p in zip(t, pivots):
        x[p] = value
    return x


def span_basis(vectors, ctx=RATIONAL_CONTEXT):
    """以 RREF 列向量表示的生成空間基底"""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return [], []
    rref, pivots, _ = row_reduce(vectors, ctx)
    return rref, pivots


def span_coordinates(basis, pivots, v, ctx=RATIONAL_CONTEXT):
    """若 v 落在 RREF 基底張成的空間中，回傳其座標，否則回傳 None"""
    coords = [v[p] for p in pivots]
    recon = [ctx.zero()] * len(v)
    for c, row in zip(coords, basis):
        if c != 0:
            recon = [a + c * b for a, b in zip(recon, row)]
    if all(ctx.equal(a, b) for a, b in zip(recon, v)):
        return coords
    return None


def inverse(m, ctx=RATIONAL_CONTEXT):
    """Gauss–Jordan 求反矩陣"""
    n = len(m)
    one = ctx.one()
    aug = [list(row) + [one if i == j else one - one for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        p = _pick_pivot(aug, c, c, ctx)
        if p is None:
            raise SingularMapError(f"矩陣不可逆：第 {c} 行找不到主元")
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(n):
            if i != c and not ctx.is_zero(aug[i][c]):
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def determinant(m, ctx=RATIONAL_CONTEXT):
    a = copy_matrix(m)
    n = len(a)
    det = ctx.one()
    for c in range(n):
        p = _pick_pivot(a, c, c, ctx)
        if p is None:
            return ctx.zero()
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        piv = a[c][c]
        det *= piv
        for i in range(c + 1, n):
            f = a[i][c]
            if f != 0:
                f = f / piv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det
