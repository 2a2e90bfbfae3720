# 領域型別與例外類別


class JacobiTsankovError(Exception):
    """所有領域錯誤的基底類別"""


class ScalarModeError(JacobiTsankovError):
    """純量模式不一致（有理數與浮點數混用）"""


class TranscendentalError(ScalarModeError):
    """有理數模式下無法精確計算超越函數"""


class DegenerateFormError(JacobiTsankovError):
    """雙線性形式退化"""


class SingularMapError(JacobiTsankovError):
    """線性映射不可逆"""


class JetEvaluationError(JacobiTsankovError):
    """Jet 求值失敗：除以零、log 非正值等"""


class ExpressionFormatError(JacobiTsankovError):
    """JSON 輸入格式錯誤"""


class ConstraintError(JacobiTsankovError):
    """線性約束無解或殘差不為零"""


class HypothesisError(JacobiTsankovError):
    """計算所需的假設不成立（例如 φ' 或 ∇R 縮併為零）"""


class QuadratureError(JacobiTsankovError):
    """數值積分未收斂"""


class ArityError(JacobiTsankovError):
    """張量縮併的槽位數與階數不符"""
