import logging

import click

from src.models import ConstraintError
from src.models.reports import CheckReport, Report, Witness
from src.routes import reported
from src.utils import linalg
from src.utils.checks import invariant_spans
from src.utils.inputs import load_json, resolve_model
from src.utils.sampling import make_rng
from src.utils.symmetry import (
    KernelParams, build_generator, kernel_constraints, kernel_dimension, kernel_element, is_symmetry,
    parse_generator, random_kernel_params, tau,
)

logger = logging.getLogger(__name__)


def _with_tau(report, t, m, spans):
    """對稱成立時附上 τ(T)"""
    if report.holds:
        try:
            report.details['tau'] = tau(t, m, spans)
        except ConstraintError as e:
            report.details['tau_error'] = str(e)
    return report


def _tau_identity(name, t, m, spans):
    ctx = m.ctx
    matrix = tau(t, m, spans)
    n = len(matrix)
    holds = linalg.matrices_equal(matrix, linalg.identity(n, ctx.one()), ctx)
    witness = None if holds else Witness('tau-identity', (), note=f"τ = {matrix}")
    return CheckReport(name, holds, witness, details={'tau': matrix})


@click.command('symmetry')
@click.argument('model')
@click.option('--generator', 'generators', multiple=True,
              help="生成元，例如 swap12、rotation:3/5,4/5、dilatation:2,1/2,1；可重複")
@click.option('--kernel-random', type=int, default=0, help='檢查 N 個隨機的 ker τ 元素')
@click.option('--kernel-dim', is_flag=True, help='回報核方程的秩與 ker τ 的維度')
@click.option('--kernel-params', type=click.Path(), default=None, help='由 JSON 參數建構 ker τ 元素')
@reported('symmetry')
def symmetry(config, model, generators, kernel_random, kernel_dim, kernel_params):
    """檢查線性映射是否保持 MODEL 的內積與曲率張量"""
    if not (generators or kernel_random or kernel_dim or kernel_params):
        raise click.UsageError('至少需要 --generator、--kernel-random、--kernel-dim 或 --kernel-params 其中之一')
    ctx = config.scalar_context()
    m = resolve_model(model, ctx)
    spans = invariant_spans(m)
    checks, data = [], {'model': model}

    for text in generators:
        spec = parse_generator(text, ctx)
        t = build_generator(spec, ctx)
        report = _with_tau(_named(is_symmetry(t, m, spans), f"is-symmetry[{text}]"), t, m, spans)
        checks.append(report)

    if kernel_dim:
        data['constraint_rank'] = linalg.rank(kernel_constraints(m), ctx)
        data['kernel_dimension'] = kernel_dimension(m)

    if kernel_params:
        params = KernelParams.from_dict(load_json(kernel_params), ctx)
        t = kernel_element(params, m)
        checks.append(_named(is_symmetry(t, m, spans), 'kernel-element'))
        checks.append(_tau_identity('kernel-element-tau', t, m, spans))

    rng = make_rng(config.seed)
    for k in range(kernel_random):
        params = random_kernel_params(rng, m)
        t = kernel_element(params, m)
        checks.append(_named(is_symmetry(t, m, spans), f"kernel-random[{k}]"))
        checks.append(_tau_identity(f"kernel-random-tau[{k}]", t, m, spans))
    logger.info(f"symmetry：{len(checks)} 項檢查")
    return Report('symmetry', config.to_dict(), checks, data)


def _named(report, name):
    report.name = name
    return report
