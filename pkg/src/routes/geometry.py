import logging
from dataclasses import dataclass

import click

from src.models import HypothesisError
from src.models.families import AFamily
from src.models.plane_wave import Point
from src.models.reports import CheckReport, Report, Witness
from src.models.scalar import scalar_to_json
from src.routes import reported
from src.utils.geodesics import (
    QUADRATURES, GeodesicSolution, exp_inverse, geodesic, geodesic_residual, trace_to_csv,
)
from src.utils.geometry import as_curvature_tensor, covariant_derivative_R, curvature_at
from src.utils.checks import validate_curvature_symmetries
from src.utils.inputs import parse_point, parse_sweep, parse_vector, resolve_metric
from src.utils.realizations import (
    FRAME, XI_MODES, metric_context, symmetric_space_check, verify_0_model_points,
    xi_csv, xi_invariant, xi_sweep,
)
from src.utils.sampling import frange, make_rng, random_points, random_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricInput:
    name: str
    params: str = None


def _load(config):
    """依 geometry 群組的參數載入度量，並決定實際使用的純量情境"""
    target = click.get_current_context().find_object(MetricInput)
    ctx = config.scalar_context()
    metric = resolve_metric(target.name, target.params, ctx)
    return metric, metric_context(metric, ctx)


def _points(config, metric, ctx, at, count=None):
    if at:
        return [parse_point(at, ctx, metric.dim)]
    rng = make_rng(config.seed)
    return [Point(c) for c in random_points(rng, count or config.points, metric.dim, ctx)]


def _write_csv(path, text):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info(f"CSV 寫入 {path}")


@click.group('geometry')
@click.argument('metric')
@click.option('--params', default=None, help='內建度量 m-phi / m-a 的參數 JSON')
@click.pass_context
def geometry(ctx, metric, params):
    """廣義平面波度量 METRIC（m-phi、m-a 或度量 JSON 檔）上的計算"""
    ctx.obj = MetricInput(metric, params)


@geometry.command('curvature')
@click.option('--at', default=None, help='以逗號分隔的座標；省略時取隨機點')
@reported('geometry curvature')
def curvature(config, at):
    """各點的 R 分量，並檢查曲率對稱性"""
    metric, ctx = _load(config)
    labels = tuple(metric.coordinate_labels())
    checks, points = [], []
    for point in _points(config, metric, ctx, at):
        R = curvature_at(metric, point)
        report = validate_curvature_symmetries(as_curvature_tensor(R), ctx, labels)
        report.name = f"curvature-symmetries[{len(points)}]"
        checks.append(report)
        points.append({'point': point.to_dict(), 'R': R.to_dict(labels)})
    return Report('geometry curvature', config.to_dict(), checks, {'metric': metric.name, 'points': points})


@geometry.command('nabla-r')
@click.option('--order', 'k', type=int, default=1, show_default=True, help='協變導數的階數 k')
@click.option('--at', default=None, help='以逗號分隔的座標；省略時取隨機點')
@reported('geometry nabla-r')
def nabla_r(config, k, at):
    """各點的 ∇ᵏR 分量"""
    metric, ctx = _load(config)
    labels = tuple(metric.coordinate_labels())
    points = []
    for point in _points(config, metric, ctx, at):
        T = covariant_derivative_R(metric, point, k)
        points.append({'point': point.to_dict(), 'nabla_r': T.to_dict(labels), 'max_abs': T.max_abs()})
    return Report('geometry nabla-r', config.to_dict(), [], {'metric': metric.name, 'order': k, 'points': points})


@geometry.command('verify-0-model')
@click.option('--points', 'count', type=int, default=None, help='取樣點數，預設為全域 --points')
@reported('geometry verify-0-model')
def verify_0_model(config, count):
    """正規化基底是否在隨機點上重現 𝔐₁₄"""
    metric, ctx = _load(config)
    points = _points(config, metric, ctx, None, count)
    report = verify_0_model_points(metric, points, ctx)
    return Report('geometry verify-0-model', config.to_dict(), [report], {'metric': metric.name})


@geometry.command('xi')
@click.option('--at', default=None, help='以逗號分隔的座標；預設為原點')
@click.option('--sweep', default=None, help='沿 x1 掃描，例如 x1=0:1:0.1')
@click.option('--method', type=click.Choice(XI_MODES), default=FRAME, show_default=True)
@click.option('--csv', 'csv_path', type=click.Path(), default=None, help='把 (x1, Xi) 寫成 CSV')
@reported('geometry xi')
def xi(config, at, sweep, method, csv_path):
    """局部等距不變量 Ξ，單點或沿 x1 掃描"""
    metric, ctx = _load(config)
    point = parse_point(at or '', ctx, metric.dim)
    if sweep:
        start, stop, step = (ctx.parse(s) for s in parse_sweep(sweep))
        values = xi_sweep(metric, point, frange(start, stop, step), method, ctx)
    else:
        values = [xi_invariant(metric, point, method, ctx)]
    if csv_path:
        _write_csv(csv_path, xi_csv(values))
    data = {'metric': metric.name, 'method': method,
            'values': [{'x1': v.x1, 'Xi': v.value, 'quotients': list(v.quotients)} for v in values]}
    return Report('geometry xi', config.to_dict(), [], data)


@geometry.command('symmetric')
@reported('geometry symmetric')
def symmetric(config):
    """𝓜_A 是否局部對稱：方程殘差與 ∇R 取樣兩種判定"""
    metric, ctx = _load(config)
    if not isinstance(metric.family, AFamily):
        raise HypothesisError('symmetric 只適用於 m-a')
    report = symmetric_space_check(metric.family, ctx, make_rng(config.seed), config.points)
    return Report('geometry symmetric', config.to_dict(), [report], {'metric': metric.name})


def _start(config, metric, ctx, at, velocity):
    rng = make_rng(config.seed)
    point = parse_point(at, ctx, metric.dim) if at else Point(random_points(rng, 1, metric.dim, ctx)[0])
    if velocity:
        v = parse_vector(velocity, ctx, metric.dim)
    else:
        v = random_vector(rng, metric.dim, ctx, bound=2)
    return point, v


@geometry.command('geodesic')
@click.option('--at', default=None, help='起點座標')
@click.option('--velocity', default=None, help='初速度；省略時隨機取')
@click.option('--t', 't_end', default='1', show_default=True, help='終點參數')
@click.option('--steps', type=int, default=10, show_default=True)
@click.option('--quadrature', type=click.Choice(QUADRATURES), default=None,
              help='exact-poly 或 adaptive；預設依度量自動選擇')
@click.option('--csv', 'csv_path', type=click.Path(), default=None, help='把軌跡寫成 CSV')
@reported('geometry geodesic')
def geodesic_cmd(config, at, velocity, t_end, steps, quadrature, csv_path):
    """測地線軌跡與其方程殘差"""
    metric, ctx = _load(config)
    point, v = _start(config, metric, ctx, at, velocity)
    t_end = ctx.parse(t_end)
    times = frange(t_end - t_end, t_end, t_end / steps) if t_end else [t_end]
    sol = GeodesicSolution(metric, point, v, quadrature)
    trace = [(t, sol.position(t)) for t in times]
    if csv_path:
        _write_csv(csv_path, trace_to_csv(metric, trace))
    residual = geodesic_residual(metric, sol, times)
    holds = ctx.is_zero(residual)
    check = CheckReport('geodesic-equation', holds,
                        None if holds else Witness('geodesic-equation', (), note=f"residual {residual}"),
                        stats={'samples': len(times), 'residual': float(residual)})
    data = {'metric': metric.name, 'quadrature': sol.quadrature, 'start': point.to_dict(),
            'velocity': [scalar_to_json(x) for x in v], 'end': trace[-1][1].to_dict()}
    return Report('geometry geodesic', config.to_dict(), [check], data)


@geometry.command('exp-inverse')
@click.option('--at', default=None, help='起點座標')
@click.option('--velocity', default=None, help='初速度；省略時隨機取')
@click.option('--quadrature', type=click.Choice(QUADRATURES), default=None)
@reported('geometry exp-inverse')
def exp_inverse_cmd(config, at, velocity, quadrature):
    """exp_P 的反函數：由 geodesic(P, v, 1) 還原 v"""
    metric, ctx = _load(config)
    point, v = _start(config, metric, ctx, at, velocity)
    target = geodesic(metric, point, v, 1, quadrature)
    recovered = exp_inverse(metric, point, target, quadrature)
    residual = max(abs(a - b) for a, b in zip(v, recovered))
    bound = 0 if ctx.exact else max(ctx.tol, 1e-9)
    holds = residual <= bound
    check = CheckReport('exp-inverse-roundtrip', holds,
                        None if holds else Witness('exp-inverse-roundtrip', (), note=f"residual {residual}"),
                        stats={'residual': float(residual)})
    data = {'metric': metric.name, 'start': point.to_dict(), 'target': target.to_dict(),
            'velocity': [scalar_to_json(x) for x in recovered]}
    return Report('geometry exp-inverse', config.to_dict(), [check], data)
