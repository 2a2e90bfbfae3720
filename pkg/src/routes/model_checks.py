import logging

import click

from src.models import ExpressionFormatError
from src.models.forms import signature
from src.models.reports import Report
from src.routes import reported
from src.utils.checks import PROPERTY_KINDS, check_all_properties, validate_curvature_symmetries
from src.utils.inputs import resolve_model

logger = logging.getLogger(__name__)


def parse_properties(text):
    if text == 'all':
        return PROPERTY_KINDS
    kinds = tuple(k.strip() for k in text.split(',') if k.strip())
    unknown = [k for k in kinds if k not in PROPERTY_KINDS]
    if unknown:
        raise ExpressionFormatError(f"未知的性質：{', '.join(unknown)}；可用：{', '.join(PROPERTY_KINDS)}")
    return kinds


@click.command('check-model')
@click.argument('model')
@click.option('--properties', default='all', show_default=True,
              help='以逗號分隔的性質名稱，或 all')
@reported('check-model')
def check_model(config, model, properties):
    """檢查 0-模型 MODEL（m14 或 JSON 檔）的曲率對稱性與算子恆等式"""
    ctx = config.scalar_context()
    kinds = parse_properties(properties)
    m = resolve_model(model, ctx)
    logger.info(f"check-model：{model}，{m.dim} 維，性質 {kinds}")
    checks = [validate_curvature_symmetries(m.tensor, ctx, m.labels)]
    checks += check_all_properties(m, kinds)
    p, q = signature(m.form, ctx)
    data = {'model': model, 'dim': m.dim, 'signature': [p, q]}
    return Report('check-model', config.to_dict(), checks, data)
