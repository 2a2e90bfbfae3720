import logging
from dataclasses import dataclass, field
from fractions import Fraction

from src.models.scalar import ScalarContext, scalar_to_json

logger = logging.getLogger(__name__)

HOLDS = 'holds'
FAILS = 'fails'


def to_jsonable(value):
    """遞迴轉成可 JSON 序列化的結構；有理數輸出為 {"num","den"}"""
    if hasattr(value, 'to_dict'):
        return value.to_dict()
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return scalar_to_json(value)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return str(value)


def vector_to_dict(v, labels=None):
    """稀疏呈現向量：{標籤: 值}，只列非零分量"""
    out = {}
    for i, x in enumerate(v):
        if x != 0:
            out[labels[i] if labels else str(i + 1)] = scalar_to_json(x)
    return out


@dataclass(frozen=True)
class Witness:
    """失敗判定的具體反例

    operands 為 (種類, 基底索引) 的元組，例如 (('J', (2, 2)), ('J', (1, 1)))；
    target 為被作用的基底向量索引，residual 為非零殘差向量。
    """
    relation: str
    operands: tuple
    target: int = None
    residual: tuple = ()
    note: str = ''

    def to_dict(self, labels=None):
        def name(i):
            return labels[i] if labels else str(i + 1)

        data = {
            'relation': self.relation,
            'operands': [
                {'kind': kind, 'indices': [name(i) for i in idx]} for kind, idx in self.operands
            ],
        }
        if self.target is not None:
            data['target'] = name(self.target)
        if self.residual:
            data['residual'] = vector_to_dict(self.residual, labels)
        if self.note:
            data['note'] = self.note
        return data


@dataclass
class CheckReport:
    name: str
    holds: bool
    witness: Witness = None
    stats: dict = field(default_factory=dict)
    mismatches: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    labels: tuple = None

    @property
    def verdict(self):
        return HOLDS if self.holds else FAILS

    def to_dict(self):
        data = {'property': self.name, 'verdict': self.verdict, 'stats': to_jsonable(self.stats)}
        if self.witness is not None:
            data['witness'] = self.witness.to_dict(self.labels)
        if self.mismatches:
            data['mismatches'] = to_jsonable(self.mismatches)
        if self.details:
            data['details'] = to_jsonable(self.details)
        return data


@dataclass
class Report:
    """CLI 指令的總報告"""
    command: str
    config: dict
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    duration: float = None

    @property
    def holds(self):
        return all(c.holds for c in self.checks)

    def to_dict(self):
        out = {
            'command': self.command,
            'config': to_jsonable(self.config),
            'holds': self.holds,
            'checks': [c.to_dict() for c in self.checks],
        }
        if self.data:
            out['data'] = to_jsonable(self.data)
        if self.duration is not None:
            out['duration'] = round(self.duration, 6)
        return out

    def summary(self):
        lines = [f"{self.command}: {'全部成立' if self.holds else '有檢查失敗'}"]
        for c in self.checks:
            lines.append(f"  {c.name}: {c.verdict}")
        return '\n'.join(lines)


@dataclass(frozen=True)
class RunConfig:
    """一次 CLI 執行的設定；由旗標或 JT_* 環境變數決定"""
    mode: str = 'rational'
    tol: float = 1e-9
    seed: int = 0
    points: int = 5
    out: str = None
    timing: bool = True

    def scalar_context(self):
        return ScalarContext(self.mode, self.tol)

    def to_dict(self):
        return {'mode': self.mode, 'tol': self.tol, 'seed': self.seed, 'points': self.points}
