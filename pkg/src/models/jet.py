import math
import logging
from fractions import Fraction

from src.models import JetEvaluationError
from src.models.scalar import cos_scalar, exp_scalar, log_scalar, sin_scalar

logger = logging.getLogger(__name__)


def _one_like(value):
    return 1.0 if isinstance(value, float) else Fraction(1)


def _prune(coeffs):
    return {k: c for k, c in coeffs.items() if c != 0}


def _merge(ka, kb):
    if not ka:
        return kb
    if not kb:
        return ka
    return tuple(sorted(ka + kb))


class Jet:
    """截斷的多變數 Taylor 展開

    係數以單項式為鍵：鍵是變數索引的排序元組（例如 (0, 0, 2) 代表 x0²·x2），
    值為 Taylor 係數 f^(α)/α!。總次數超過 order 的項一律丟棄。
    """

    __slots__ = ('coeffs', 'order')

    def __init__(self, coeffs, order: int):
        if order < 0:
            raise JetEvaluationError(f"Jet 階數不可為負：{order}")
        self.coeffs = _prune({k: c for k, c in coeffs.items() if len(k) <= order})
        self.order = order

    @classmethod
    def constant(cls, value, order: int):
        return cls({(): value}, order)

    @classmethod
    def variable(cls, index: int, value, order: int):
        coeffs = {(): value}
        if order >= 1:
            coeffs[(index,)] = _one_like(value)
        return cls(coeffs, order)

    @property
    def value(self):
        if () in self.coeffs:
            return self.coeffs[()]
        if any(isinstance(c, float) for c in self.coeffs.values()):
            return 0.0
        return Fraction(0)

    def coefficient(self, key):
        return self.coeffs.get(tuple(sorted(key)), 0)

    def variables(self):
        return sorted({i for key in self.coeffs for i in key})

    def is_zero(self, ctx=None) -> bool:
        if ctx is None:
            return not self.coeffs
        return all(ctx.is_zero(c) for c in self.coeffs.values())

    def truncate(self, order: int):
        return Jet(self.coeffs, min(order, self.order))

    def derivative(self, index: int):
        """對變數 index 偏微分，階數降一"""
        if self.order == 0:
            raise JetEvaluationError("0 階 Jet 無法再微分")
        out = {}
        for key, c in self.coeffs.items():
            m = key.count(index)
            if m == 0:
                continue
            pos = key.index(index)
            reduced = key[:pos] + key[pos + 1:]
            out[reduced] = out.get(reduced, 0) + c * m
        return Jet(out, self.order - 1)

    def partial(self, *indices):
        """回傳實際的混合偏導數值（係數乘上各重數的階乘）"""
        key = tuple(sorted(indices))
        if len(key) > self.order:
            raise JetEvaluationError(f"要求 {len(key)} 階導數，但 Jet 只有 {self.order} 階")
        factor = 1
        for i in set(key):
            factor *= math.factorial(key.count(i))
        return self.coeffs.get(key, 0) * factor

    def derivative_sequence(self, index: int = 0):
        return tuple(self.partial(*([index] * m)) for m in range(self.order + 1))

    def derivatives(self):
        return {key: self.partial(*key) for key in self.coeffs}

    # 算術

    def __add__(self, other):
        if not isinstance(other, Jet):
            out = dict(self.coeffs)
            out[()] = out.get((), 0) + other
            return Jet(out, self.order)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return Jet(out, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return Jet({k: -c for k, c in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                return Jet({}, self.order)
            return Jet({k: c * other for k, c in self.coeffs.items()}, self.order)
        order = min(self.order, other.order)
        out = {}
        for ka, ca in self.coeffs.items():
            la = len(ka)
            if la > order:
                continue
            for kb, cb in other.coeffs.items():
                if la + len(kb) > order:
                    continue
                key = _merge(ka, kb)
                out[key] = out.get(key, 0) + ca * cb
        return Jet(out, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                raise JetEvaluationError("除以零")
            return Jet({k: c / other for k, c in self.coeffs.items()}, self.order)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise JetEvaluationError(f"只支援整數次方：{n!r}")
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Jet.constant(_one_like(self.value), self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # 初等函數：f(c0 + h) = Σ f⁽ⁿ⁾(c0)/n! · hⁿ

    def _compose(self, series):
        h = Jet({k: c for k, c in self.coeffs.items() if k}, self.order)
        result = Jet.constant(series[0], self.order)
        power = Jet.constant(_one_like(self.value), self.order)
        for n in range(1, self.order + 1):
            power = power * h
            if not power.coeffs:
                break
            result = result + power * series[n]
        return result

    def reciprocal(self):
        c0 = self.value
        if c0 == 0:
            raise JetEvaluationError("除以零：分母在展開點為 0")
        return self._compose([(-1) ** n / c0 ** (n + 1) for n in range(self.order + 1)])

    def exp(self):
        e = exp_scalar(self.value)
        return self._compose([e / math.factorial(n) for n in range(self.order + 1)])

    def sin(self):
        s, c = sin_scalar(self.value), cos_scalar(self.value)
        cycle = (s, c, -s, -c)
        return self._compose([cycle[n % 4] / math.factorial(n) for n in range(self.order + 1)])

    def cos(self):
        s, c = sin_scalar(self.value), cos_scalar(self.value)
        cycle = (c, -s, -c, s)
        return self._compose([cycle[n % 4] / math.factorial(n) for n in range(self.order + 1)])

    def log(self):
        c0 = self.value
        if c0 <= 0:
            raise JetEvaluationError(f"log 的引數在展開點必須為正，得到 {c0}")
        series = [log_scalar(c0)]
        series += [(-1) ** (n + 1) / (n * c0 ** n) for n in range(1, self.order + 1)]
        return self._compose(series)

    def __repr__(self):
        return f"Jet(order={self.order}, coeffs={self.coeffs})"
