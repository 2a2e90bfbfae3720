import math
import logging
from dataclasses import dataclass
from fractions import Fraction

from src.models import ExpressionFormatError, ScalarModeError, TranscendentalError

logger = logging.getLogger(__name__)

RATIONAL = 'rational'
FLOAT = 'float'
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ScalarContext:
    """計算情境：固定純量模式與浮點容許誤差"""
    mode: str = RATIONAL
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.mode not in (RATIONAL, FLOAT):
            raise ScalarModeError(f"未知的純量模式：{self.mode}")
        if self.tol < 0:
            raise ScalarModeError(f"容許誤差不可為負：{self.tol}")

    @property
    def exact(self) -> bool:
        return self.mode == RATIONAL

    def coerce(self, value):
        """將輸入轉成本情境的純量；有理數模式拒絕浮點數"""
        if isinstance(value, bool):
            raise ScalarModeError(f"不支援布林值作為純量：{value}")
        if self.exact:
            if isinstance(value, float):
                raise ScalarModeError(f"有理數模式不接受浮點數：{value}")
            if isinstance(value, (int, Fraction)):
                return Fraction(value)
            raise ScalarModeError(f"無法轉換為有理數：{value!r}")
        if isinstance(value, (int, float, Fraction)):
            return float(value)
        raise ScalarModeError(f"無法轉換為浮點數：{value!r}")

    def is_zero(self, value) -> bool:
        if self.exact:
            return value == 0
        return abs(value) <= self.tol

    def equal(self, a, b) -> bool:
        """有理數模式精確比較；浮點模式使用相對誤差"""
        if self.exact:
            return a == b
        scale = max(1.0, abs(a), abs(b))
        return abs(a - b) <= self.tol * scale

    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def one(self):
        return Fraction(1) if self.exact else 1.0

    def parse(self, text):
        return self.coerce(parse_scalar(text, exact=self.exact))

    def to_dict(self):
        return {'mode': self.mode, 'tol': self.tol}


RATIONAL_CONTEXT = ScalarContext(RATIONAL)
FLOAT_CONTEXT = ScalarContext(FLOAT)


def parse_scalar(text, exact: bool = True):
    """解析 '3/5'、'-2'、'0.25' 或 JSON 數值"""
    if isinstance(text, dict):
        value = scalar_from_json(text)
        return value if exact or isinstance(value, float) else float(value)
    if isinstance(text, bool):
        raise ExpressionFormatError(f"無法解析純量：{text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(str(text)) if exact else text
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ExpressionFormatError(f"無法解析純量：{text!r}") from e
    return value if exact else float(value)


def scalar_to_json(value):
    """有理數輸出為 {"num","den"} 十進位字串，浮點數輸出原值"""
    if isinstance(value, int) and not isinstance(value, bool):
        value = Fraction(value)
    if isinstance(value, Fraction):
        return {'num': str(value.numerator), 'den': str(value.denominator)}
    return float(value)


def scalar_from_json(data):
    if isinstance(data, dict):
        if 'num' in data:
            try:
                return Fraction(int(data['num']), int(data.get('den', '1')))
            except (ValueError, ZeroDivisionError) as e:
                raise ExpressionFormatError(f"有理數格式錯誤：{data}") from e
        if 'float' in data:
            return float(data['float'])
        raise ExpressionFormatError(f"無法辨識的純量物件：{data}")
    if isinstance(data, (int, float, str)) and not isinstance(data, bool):
        return parse_scalar(data)
    raise ExpressionFormatError(f"無法辨識的純量：{data!r}")


def scalar_text(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return repr(float(value))


# 超越函數：有理數只在可精確表示的點上求值

def exp_scalar(value):
    if isinstance(value, Fraction):
        if value == 0:
            return Fraction(1)
        raise TranscendentalError(f"exp({value}) 不是有理數，請改用 float 模式")
    return math.exp(value)


def sin_scalar(value):
    if isinstance(value, Fraction):
        if value == 0:
            return Fraction(0)
        raise TranscendentalError(f"sin({value}) 不是有理數，請改用 float 模式")
    return math.sin(value)


def cos_scalar(value):
    if isinstance(value, Fraction):
        if value == 0:
            return Fraction(1)
        raise TranscendentalError(f"cos({value}) 不是有理數，請改用 float 模式")
    return math.cos(value)


def log_scalar(value):
    if value <= 0:
        # 由呼叫端轉成 JetEvaluationError
        raise ValueError(f"log 的引數必須為正：{value}")
    if isinstance(value, Fraction):
        if value == 1:
            return Fraction(0)
        raise TranscendentalError(f"log({value}) 不是有理數，請改用 float 模式")
    return math.log(value)
