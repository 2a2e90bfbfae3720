import logging
from dataclasses import dataclass

from src.models import DegenerateFormError, ExpressionFormatError, SingularMapError
from src.models.scalar import RATIONAL_CONTEXT, scalar_from_json, scalar_to_json
from src.utils import linalg

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BilinearForm:
    """對稱雙線性形式 G[i][j]"""
    entries: tuple

    def __post_init__(self):
        rows = [list(row) for row in self.entries]
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise ExpressionFormatError("雙線性形式必須是非空的方陣")
        for i in range(n):
            for j in range(i + 1, n):
                a, b = rows[i][j], rows[j][i]
                if a == b:
                    continue
                # 浮點捨入造成的微小不對稱直接取平均
                if isinstance(a, float) or isinstance(b, float):
                    if abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b)):
                        rows[i][j] = rows[j][i] = (a + b) / 2
                        continue
                raise ExpressionFormatError(f"雙線性形式不對稱：({i}, {j})")
        object.__setattr__(self, 'entries', tuple(tuple(row) for row in rows))

    @classmethod
    def identity(cls, n):
        return cls(linalg.identity(n))

    @property
    def dim(self):
        return len(self.entries)

    def matrix(self):
        return [list(row) for row in self.entries]

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __call__(self, x, y):
        """⟨x, y⟩ = xᵀ G y"""
        return linalg.dot(x, linalg.mat_vec(self.entries, y))

    def restrict(self, indices):
        return BilinearForm([[self.entries[i][j] for j in indices] for i in indices])

    def determinant(self, ctx=RATIONAL_CONTEXT):
        return linalg.determinant(self.entries, ctx)

    def congruent(self, s):
        """回傳 Sᵀ G S"""
        return BilinearForm(linalg.mat_mul(linalg.transpose(s), linalg.mat_mul(self.entries, s)))

    def to_dict(self):
        return [[scalar_to_json(v) for v in row] for row in self.entries]

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, list):
            raise ExpressionFormatError("form 必須是二維陣列")
        return cls([[scalar_from_json(v) for v in row] for row in data])


def signature(form: BilinearForm, ctx=RATIONAL_CONTEXT):
    """以對稱合同對角化計算 (p, q)，p 為負方向個數"""
    m = form.matrix()
    n = len(m)
    p = q = 0
    for k in range(n):
        piv = next((i for i in range(k, n) if not ctx.is_zero(m[i][i])), None)
        if piv is None:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n)
                         if not ctx.is_zero(m[i][j])), None)
            if pair is None:
                raise DegenerateFormError(f"雙線性形式退化：秩為 {k}，維度 {n}")
            i, j = pair
            # e_i ← e_i + e_j，使對角元變成 2 G_ij ≠ 0
            for c in range(n):
                m[i][c] += m[j][c]
            for r in range(n):
                m[r][i] += m[r][j]
            piv = i
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            for row in m:
                row[k], row[piv] = row[piv], row[k]
        d = m[k][k]
        if d < 0:
            p += 1
        else:
            q += 1
        for i in range(k + 1, n):
            f = m[i][k]
            if f == 0:
                continue
            for j in range(k + 1, n):
                m[i][j] -= f * m[k][j] / d
    logger.debug(f"signature：維度 {n}，(p, q) = ({p}, {q})")
    return p, q


def invert_form(form: BilinearForm, ctx=RATIONAL_CONTEXT):
    try:
        inv = linalg.inverse(form.entries, ctx)
    except SingularMapError as e:
        raise DegenerateFormError(f"雙線性形式退化，無法求逆：{e}") from None
    # 數值誤差可能破壞對稱性，取對稱部分
    n = len(inv)
    sym = [[inv[i][j] if ctx.exact else (inv[i][j] + inv[j][i]) / 2 for j in range(n)] for i in range(n)]
    return BilinearForm(sym)
