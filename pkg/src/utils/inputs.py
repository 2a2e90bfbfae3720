import json
import logging
import os

from src.models import ExpressionFormatError
from src.models.curvature import Model0, build_M14
from src.models.families import AFamily, PhiFamily, build_M_A, build_M_Phi
from src.models.plane_wave import PlaneWaveMetric, Point

logger = logging.getLogger(__name__)

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'static', 'fixtures')
BUILTIN_MODELS = ('m14',)
BUILTIN_METRICS = ('m-phi', 'm-a')
DEFAULT_PARAMS = {'m-phi': 'log-family.json', 'm-a': 'sym.json'}


def fixture_path(name):
    return os.path.join(FIXTURES_DIR, name)


def load_json(path):
    """讀取 JSON；找不到檔案時改找內建 fixtures 目錄下的同名檔"""
    if not os.path.exists(path) and os.path.exists(fixture_path(path)):
        path = fixture_path(path)
    logger.debug(f"讀取 {path}")
    try:
        with open(path, encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ExpressionFormatError(f"{path} 不是合法的 JSON：{e}") from e


def resolve_model(name, ctx) -> Model0:
    if name == 'm14':
        model = build_M14()
        return model if ctx.exact else Model0.from_dict(model.to_dict(), ctx)
    return Model0.from_dict(load_json(name), ctx)


def resolve_metric(name, params, ctx) -> PlaneWaveMetric:
    """內建 m-phi / m-a 搭配參數檔，否則把 name 當成度量 JSON 路徑"""
    if name in BUILTIN_METRICS:
        data = load_json(params or DEFAULT_PARAMS[name])
        if name == 'm-phi':
            return build_M_Phi(PhiFamily.from_dict(data))
        return build_M_A(AFamily.from_dict(data, ctx))
    if params:
        logger.warning(f"--params 只適用於內建度量，忽略 {params}")
    return PlaneWaveMetric.from_dict(load_json(name), name=os.path.basename(name))


def parse_vector(text, ctx, n=None):
    """'1,1/2,-3' → 純量串列；給定 n 時不足的分量補零"""
    try:
        values = [ctx.parse(s.strip()) for s in text.split(',') if s.strip()]
    except ValueError as e:
        raise ExpressionFormatError(f"無法解析向量：{text}") from e
    if n is not None:
        if len(values) > n:
            raise ExpressionFormatError(f"向量有 {len(values)} 個分量，超過維度 {n}")
        values += [ctx.zero()] * (n - len(values))
    return values


def parse_point(text, ctx, n):
    return Point(parse_vector(text, ctx, n))


def parse_sweep(text):
    """'x1=0:1:0.1' → (start, stop, step) 字串"""
    try:
        name, spec = text.split('=', 1)
        start, stop, step = spec.split(':')
    except ValueError:
        raise ExpressionFormatError(f"--sweep 格式應為 x1=START:STOP:STEP：{text}") from None
    if name.strip() != 'x1':
        raise ExpressionFormatError(f"只支援沿 x1 掃描：{name}")
    return start, stop, step
