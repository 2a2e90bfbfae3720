import logging
from fractions import Fraction

from src.models import ExpressionFormatError, JetEvaluationError
from src.models.jet import Jet
from src.models.scalar import (
    cos_scalar, exp_scalar, log_scalar, scalar_from_json, scalar_to_json, sin_scalar,
)

logger = logging.getLogger(__name__)


class FnExpr:
    """純量函數的運算式樹

    變數以 1 起算（Var(1) 即 x₁），求值時 env[i - 1] 提供 x_i 的值；
    值可以是有理數、浮點數或 Jet，所有節點對三者一視同仁。
    """

    precedence = 100
    op_name = None

    def __init__(self, operands=()):
        self.operands = tuple(operands)

    def __repr__(self):
        return f"{type(self).__name__}{self.operands!r}"

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and getattr(self, 'value', None) == getattr(other, 'value', None)
            and self.operands == other.operands
        )

    def __hash__(self):
        return hash((type(self), getattr(self, 'value', None), self.operands))

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return mul(Const(-1), self)

    def __pow__(self, n):
        return power(self, n)

    def __call__(self, *args):
        return compose(self, [_coerce(a) for a in args])

    def _wrap(self, operand):
        if operand.precedence < self.precedence:
            return f"({operand})"
        return str(operand)

    # 子類別實作

    def evaluate(self, env):
        raise NotImplementedError

    def diff(self, index: int):
        raise NotImplementedError

    def degree(self):
        raise NotImplementedError

    def variables(self):
        found = set()
        for op in self.operands:
            found |= op.variables()
        return found

    def is_transcendental(self) -> bool:
        return any(op.is_transcendental() for op in self.operands)

    def is_polynomial(self) -> bool:
        return self.degree() is not None

    def to_dict(self):
        return {'op': self.op_name, 'args': [op.to_dict() for op in self.operands]}


class Const(FnExpr):
    def __init__(self, value):
        super().__init__(())
        if isinstance(value, int) and not isinstance(value, bool):
            value = Fraction(value)
        self.value = value

    def __str__(self):
        return str(self.value)

    def __repr__(self):
        return f"Const({self.value})"

    def evaluate(self, env):
        return self.value

    def diff(self, index):
        return ZERO

    def degree(self):
        return 0

    def variables(self):
        return set()

    def to_dict(self):
        if isinstance(self.value, float):
            return {'float': repr(self.value)}
        return scalar_to_json(self.value)


class Var(FnExpr):
    def __init__(self, index: int):
        super().__init__(())
        if index < 1:
            raise ExpressionFormatError(f"變數索引從 1 起算，得到 {index}")
        self.value = index

    @property
    def index(self):
        return self.value

    def __str__(self):
        return f"x{self.value}"

    def __repr__(self):
        return f"Var({self.value})"

    def evaluate(self, env):
        try:
            return env[self.value - 1]
        except IndexError:
            raise ExpressionFormatError(f"變數 x{self.value} 沒有對應的值") from None

    def diff(self, index):
        return ONE if index == self.value else ZERO

    def degree(self):
        return 1

    def variables(self):
        return {self.value}

    def to_dict(self):
        return {'var': self.value}


class Add(FnExpr):
    precedence = 1
    op_name = 'add'

    def __str__(self):
        left, right = self.operands
        return f"{self._wrap(left)} + {self._wrap(right)}"

    def evaluate(self, env):
        left, right = self.operands
        return left.evaluate(env) + right.evaluate(env)

    def diff(self, index):
        left, right = self.operands
        return add(left.diff(index), right.diff(index))

    def degree(self):
        degrees = [op.degree() for op in self.operands]
        return None if None in degrees else max(degrees)


class Sub(FnExpr):
    precedence = 1
    op_name = 'sub'

    def __str__(self):
        left, right = self.operands
        right_text = f"({right})" if right.precedence <= self.precedence else str(right)
        return f"{self._wrap(left)} - {right_text}"

    def evaluate(self, env):
        left, right = self.operands
        return left.evaluate(env) - right.evaluate(env)

    def diff(self, index):
        left, right = self.operands
        return sub(left.diff(index), right.diff(index))

    def degree(self):
        degrees = [op.degree() for op in self.operands]
        return None if None in degrees else max(degrees)


class Mul(FnExpr):
    precedence = 2
    op_name = 'mul'

    def __str__(self):
        left, right = self.operands
        return f"{self._wrap(left)} * {self._wrap(right)}"

    def evaluate(self, env):
        left, right = self.operands
        return left.evaluate(env) * right.evaluate(env)

    def diff(self, index):
        left, right = self.operands
        return add(mul(left.diff(index), right), mul(left, right.diff(index)))

    def degree(self):
        degrees = [op.degree() for op in self.operands]
        return None if None in degrees else sum(degrees)


class Div(FnExpr):
    precedence = 2
    op_name = 'div'

    def __str__(self):
        left, right = self.operands
        right_text = f"({right})" if right.precedence <= self.precedence else str(right)
        return f"{self._wrap(left)} / {right_text}"

    def evaluate(self, env):
        left, right = self.operands
        den = right.evaluate(env)
        if not isinstance(den, Jet) and den == 0:
            raise JetEvaluationError(f"除以零：{self}")
        return left.evaluate(env) / den

    def diff(self, index):
        left, right = self.operands
        return sub(div(left.diff(index), right),
                   div(mul(left, right.diff(index)), power(right, 2)))

    def degree(self):
        left, right = self.operands
        if right.degree() != 0:
            return None
        return left.degree()


class Pow(FnExpr):
    precedence = 3
    op_name = 'pow'

    def __init__(self, base, exponent: int):
        super().__init__((base,))
        self.value = exponent

    @property
    def exponent(self):
        return self.value

    def __str__(self):
        return f"{self._wrap(self.operands[0])}^{self.value}"

    def evaluate(self, env):
        base = self.operands[0].evaluate(env)
        if self.value < 0 and not isinstance(base, Jet) and base == 0:
            raise JetEvaluationError(f"0 的負次方：{self}")
        return base ** self.value

    def diff(self, index):
        base = self.operands[0]
        return mul(mul(Const(self.value), power(base, self.value - 1)), base.diff(index))

    def degree(self):
        d = self.operands[0].degree()
        if d is None:
            return None
        if self.value >= 0:
            return d * self.value
        return 0 if d == 0 else None

    def to_dict(self):
        return {'op': 'pow', 'args': [self.operands[0].to_dict(), scalar_to_json(Fraction(self.value))]}


class _Unary(FnExpr):
    scalar_fn = None

    def __str__(self):
        return f"{self.op_name}({self.operands[0]})"

    def apply(self, value):
        if isinstance(value, Jet):
            return getattr(value, self.op_name)()
        return type(self).scalar_fn(value)

    def evaluate(self, env):
        return self.apply(self.operands[0].evaluate(env))

    def degree(self):
        return 0 if self.operands[0].degree() == 0 else None

    def is_transcendental(self):
        return True


class Exp(_Unary):
    op_name = 'exp'
    scalar_fn = staticmethod(exp_scalar)

    def diff(self, index):
        return mul(self, self.operands[0].diff(index))


class Sin(_Unary):
    op_name = 'sin'
    scalar_fn = staticmethod(sin_scalar)

    def diff(self, index):
        return mul(Cos((self.operands[0],)), self.operands[0].diff(index))


class Cos(_Unary):
    op_name = 'cos'
    scalar_fn = staticmethod(cos_scalar)

    def diff(self, index):
        return mul(mul(Const(-1), Sin((self.operands[0],))), self.operands[0].diff(index))


class Log(_Unary):
    op_name = 'log'

    @staticmethod
    def scalar_fn(value):
        try:
            return log_scalar(value)
        except ValueError as e:
            raise JetEvaluationError(str(e)) from None

    def diff(self, index):
        return div(self.operands[0].diff(index), self.operands[0])


class Compose(FnExpr):
    """f(g₁, …, g_m)：以 g_j 代入 f 的第 j 個變數"""
    op_name = 'compose'

    def __init__(self, outer, args):
        super().__init__((outer, *args))

    @property
    def outer(self):
        return self.operands[0]

    @property
    def args(self):
        return self.operands[1:]

    def __str__(self):
        return f"[{self.outer}]({', '.join(str(a) for a in self.args)})"

    def evaluate(self, env):
        return self.outer.evaluate([a.evaluate(env) for a in self.args])

    def diff(self, index):
        total = ZERO
        for j, arg in enumerate(self.args, start=1):
            inner = arg.diff(index)
            if inner == ZERO:
                continue
            total = add(total, mul(compose(self.outer.diff(j), self.args), inner))
        return total

    def degree(self):
        outer = self.outer.degree()
        if outer is None:
            return None
        if outer == 0:
            return 0
        inner = [a.degree() for a in self.args]
        if None in inner:
            return None
        return outer * max(inner, default=0)

    def variables(self):
        found = set()
        for a in self.args:
            found |= a.variables()
        return found


ZERO = Const(0)
ONE = Const(1)


def _coerce(value):
    if isinstance(value, FnExpr):
        return value
    if isinstance(value, (int, Fraction, float)) and not isinstance(value, bool):
        return Const(value)
    raise ExpressionFormatError(f"無法轉成運算式：{value!r}")


def _is_const(expr, value=None):
    if not isinstance(expr, Const):
        return False
    return value is None or expr.value == value


# 建構函式（只做常數摺疊，不做其他化簡）

def const(value):
    return Const(value)


def var(index: int):
    return Var(index)


def add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    return Add((a, b))


def sub(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return mul(Const(-1), b)
    return Sub((a, b))


def mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(b):
        a, b = b, a
    if _is_const(a) and isinstance(b, Mul) and _is_const(b.operands[0]):
        return mul(Const(a.value * b.operands[0].value), b.operands[1])
    return Mul((a, b))


def div(a, b):
    if _is_const(b) and b.value != 0:
        if _is_const(a):
            return Const(a.value / b.value)
        if b.value == 1:
            return a
    if _is_const(a, 0) and not _is_const(b, 0):
        return ZERO
    return Div((a, b))


def power(base, n):
    if not isinstance(n, int) or isinstance(n, bool):
        raise ExpressionFormatError(f"次方必須為整數：{n!r}")
    if n == 0:
        return ONE
    if n == 1:
        return base
    if _is_const(base) and (base.value != 0 or n > 0):
        return Const(base.value ** n)
    return Pow(base, n)


def exp(arg):
    arg = _coerce(arg)
    if _is_const(arg, 0):
        return ONE
    return Exp((arg,))


def sin(arg):
    arg = _coerce(arg)
    if _is_const(arg, 0):
        return ZERO
    return Sin((arg,))


def cos(arg):
    arg = _coerce(arg)
    if _is_const(arg, 0):
        return ONE
    return Cos((arg,))


def log(arg):
    arg = _coerce(arg)
    if _is_const(arg, 1):
        return ZERO
    return Log((arg,))


def compose(outer, args):
    args = tuple(_coerce(a) for a in args)
    if _is_const(outer):
        return outer
    if isinstance(outer, Var):
        if outer.index > len(args):
            raise ExpressionFormatError(f"合成時缺少第 {outer.index} 個引數")
        return args[outer.index - 1]
    return Compose(outer, args)


# JSON

_BINARY = {'add': add, 'sub': sub, 'mul': mul, 'div': div}
_UNARY = {'exp': exp, 'sin': sin, 'cos': cos, 'log': log}


def expr_from_dict(data):
    """由 {"op","args"} / {"var"} / {"num","den"} 結構還原運算式"""
    if isinstance(data, FnExpr):
        return data
    if isinstance(data, (int, float, str)) and not isinstance(data, bool):
        return Const(scalar_from_json(data))
    if not isinstance(data, dict):
        raise ExpressionFormatError(f"無法解析的運算式節點：{data!r}")
    if 'var' in data:
        try:
            return Var(int(data['var']))
        except (TypeError, ValueError) as e:
            raise ExpressionFormatError(f"變數索引格式錯誤：{data}") from e
    if 'num' in data or 'float' in data:
        return Const(scalar_from_json(data))
    op = data.get('op')
    args = data.get('args')
    if not isinstance(args, list) or not args:
        raise ExpressionFormatError(f"運算 {op!r} 缺少 args")
    if op in _BINARY:
        nodes = [expr_from_dict(a) for a in args]
        if len(nodes) < 2 and op in ('sub', 'div'):
            raise ExpressionFormatError(f"{op} 需要兩個引數")
        result = nodes[0]
        for node in nodes[1:]:
            result = _BINARY[op](result, node)
        return result
    if op == 'neg' and len(args) == 1:
        return -expr_from_dict(args[0])
    if op in _UNARY:
        if len(args) != 1:
            raise ExpressionFormatError(f"{op} 只接受一個引數")
        return _UNARY[op](expr_from_dict(args[0]))
    if op == 'pow':
        if len(args) != 2:
            raise ExpressionFormatError("pow 需要底數與整數指數")
        n = scalar_from_json(args[1])
        if isinstance(n, float) or n.denominator != 1:
            raise ExpressionFormatError(f"pow 的指數必須為整數：{args[1]}")
        return power(expr_from_dict(args[0]), int(n))
    if op == 'compose':
        nodes = [expr_from_dict(a) for a in args]
        return compose(nodes[0], nodes[1:])
    raise ExpressionFormatError(f"未知的運算：{op!r}")


def jet_eval(f: FnExpr, point, dirs, k: int):
    """在 point 展開 f，沿 dirs 列出的變數（1 起算）取到 k 階

    回傳的 Jet 以 dirs 中的位置 0, 1, … 作為變數索引。
    """
    if k < 0:
        raise JetEvaluationError(f"階數必須非負：{k}")
    env = list(point)
    for pos, index in enumerate(dirs):
        if not 1 <= index <= len(env):
            raise ExpressionFormatError(f"方向 x{index} 超出點的維度 {len(env)}")
        env[index - 1] = Jet.variable(pos, env[index - 1], k)
    value = f.evaluate(env)
    if not isinstance(value, Jet):
        value = Jet.constant(value, k)
    logger.debug(f"jet_eval 完成：{f}，階數 {k}，{len(value.coeffs)} 個係數")
    return value
