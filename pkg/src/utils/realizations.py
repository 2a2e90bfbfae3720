import csv
import io
import logging
from fractions import Fraction

from src.models import ArityError, ConstraintError, ExpressionFormatError, HypothesisError
from src.models.curvature import M14_LABELS, M14_TENSOR_ENTRIES, CurvatureTensor, Model0, build_M14, canonical_index
from src.models.expr import add, const, mul, var
from src.models.families import AFamily, FAMILY_KEYS, PhiFamily, XiValue, build_M_A
from src.models.plane_wave import Frame, PlaneWaveMetric, Point
from src.models.reports import CheckReport, Witness
from src.models.scalar import FLOAT, RATIONAL_CONTEXT, ScalarContext
from src.utils import linalg
from src.utils.geometry import contract, covariant_derivative_R, curvature_at, frame_form, metric_at, to_frame
from src.utils.sampling import make_rng, random_points, random_scalar
from src.utils.symmetry import KERNEL_TUPLES, N_BETA, kernel_constraints

logger = logging.getLogger(__name__)

FRAME = 'frame'
DIRECT = 'direct'
XI_MODES = (FRAME, DIRECT)

# β 標籤 → 使 A(α_p, α_q, α_r, β) = 1 的 α 三元組；β₄,ⱼ 不在其中，不做縮放
UNIT_ORBITS = {idx[3]: idx[:3] for idx, value in M14_TENSOR_ENTRIES if value == 1}

# 1-正規化基底中 ∇R(α, α, α, β; α) 唯一允許非零的位置（含前兩槽交換）
NABLA_PATTERN = {(0, 2, 2, 6, 0), (2, 0, 2, 6, 0), (0, 1, 1, 7, 0), (1, 0, 1, 7, 0)}

# 𝓜_A 上 ∇R 的九個非零分量 (i, j, k, l; m)，索引指 ∂x_i
NABLA_R_COMPONENTS = (
    (1, 2, 2, 1, 3), (1, 3, 3, 1, 2), (2, 3, 3, 2, 1),
    (2, 1, 1, 3, 2), (2, 1, 1, 3, 3), (1, 2, 2, 3, 1),
    (1, 2, 2, 3, 3), (1, 3, 3, 2, 1), (1, 3, 3, 2, 2),
)
_GRID_CHECKS = ((1, 2, 3), (2, 3, 5), (5, 1, 2), (3, 5, 1))

SYMMETRIC_EQUATIONS = (
    'a11 + a22 + a31*a32 = 2',
    '3*a21 + 3*a31 + 3*a11*a12 = 4',
    '3*a12 + 3*a32 + 3*a21*a22 = 4',
)


def metric_context(metric: PlaneWaveMetric, ctx=RATIONAL_CONTEXT):
    """含超越函數的度量自動改用 float 模式"""
    if ctx.exact and metric.is_transcendental():
        logger.info(f"{metric.name} 含超越函數，改用 float 模式")
        return ScalarContext(FLOAT, ctx.tol)
    return ctx


def coerce_point(point, ctx):
    coords = point.coords if isinstance(point, Point) else point
    return Point([ctx.coerce(v) for v in coords])


def _unit(n, i, ctx):
    v = [ctx.zero()] * n
    v[i] = ctx.one()
    return v


def _axpy(y, c, x):
    if c == 0:
        return y
    return [a + c * b for a, b in zip(y, x)]


def _require_m14_shape(metric):
    if metric.a != 3 or metric.b != 8:
        raise HypothesisError(f"需要 a=3、b=8 的度量，得到 a={metric.a}、b={metric.b}")


def frame_model(metric: PlaneWaveMetric, frame: Frame, ctx=RATIONAL_CONTEXT, curvature=None) -> Model0:
    """把 g_P 與 R_P 拉回到 frame 上，得到一個 0-模型"""
    R = curvature if curvature is not None else curvature_at(metric, frame.point)
    comps = to_frame(R, frame).components
    entries = {k: v for k, v in comps.items() if canonical_index(k)[0] == k and not ctx.is_zero(v)}
    form = frame_form(metric, frame)
    return Model0(form, CurvatureTensor(frame.size, entries), frame.roles, ctx)


def normalize_basis_0(metric: PlaneWaveMetric, point, ctx=RATIONAL_CONTEXT) -> Frame:
    """三階段建構使 g_P 與 R_P 等於 𝔐₁₄ 的基底

    (a) 座標向量，∂y_ν 依單位軌道上的 R 值縮放；
    (b) α 加上 β 方向的位移以消去 R(α,α,α,α)，β 同時加上 α* 方向的位移保持正交；
    (c) α 加上 α* 方向的位移使 ⟨α_i, α_j⟩ = 0。
    """
    _require_m14_shape(metric)
    ctx = metric_context(metric, ctx)
    point = coerce_point(point, ctx)
    n = metric.dim
    R = curvature_at(metric, point)

    x = [_unit(n, metric.x_index(i), ctx) for i in range(3)]
    xstar = [_unit(n, metric.xstar_index(i), ctx) for i in range(3)]
    beta, scales = [], {}
    for nu, label in enumerate(M14_LABELS[6:]):
        e = _unit(n, metric.y_index(nu), ctx)
        if label in UNIT_ORBITS:
            p, q, r = (M14_LABELS.index(s) for s in UNIT_ORBITS[label])
            s = R(metric.x_index(p), metric.x_index(q), metric.x_index(r), metric.y_index(nu))
            if ctx.is_zero(s):
                raise HypothesisError(
                    f"R(∂x{p + 1}, ∂x{q + 1}, ∂x{r + 1}, ∂y{nu + 1}) 在該點為零，無法正規化 {label}")
            scales[label] = s
            e = [v / s for v in e]
        beta.append(e)
    stage_a = Frame(point, x + xstar + beta, M14_LABELS)

    model_a = frame_model(metric, stage_a, ctx, R)
    rhs = [-model_a.tensor(*(t - 1 for t in tup)) for tup in KERNEL_TUPLES]
    try:
        u = linalg.solve(kernel_constraints(model_a), rhs, ctx)
    except ConstraintError as e:
        raise HypothesisError(f"無法消去 R(α,α,α,α)：{e}") from e
    alpha = [list(x[i]) for i in range(3)]
    for i in range(3):
        for nu in range(N_BETA):
            alpha[i] = _axpy(alpha[i], u[i * N_BETA + nu], beta[nu])

    g = metric_at(metric, point).entries

    def inner(v, w):
        return linalg.dot(v, linalg.mat_vec(g, w))

    d = [[-inner(alpha[i], beta[nu]) for i in range(3)] for nu in range(N_BETA)]
    beta_t = []
    for nu in range(N_BETA):
        vec = beta[nu]
        for i in range(3):
            vec = _axpy(vec, d[nu][i], xstar[i])
        beta_t.append(vec)

    half = ctx.coerce(Fraction(1, 2))
    w = [[-half * inner(alpha[i], alpha[j]) for j in range(3)] for i in range(3)]
    final = []
    for i in range(3):
        vec = alpha[i]
        for j in range(3):
            vec = _axpy(vec, w[i][j], xstar[j])
        final.append(vec)

    stages = {
        'scales': scales,
        'curvature_shifts': [u[i * N_BETA:(i + 1) * N_BETA] for i in range(3)],
        'beta_shifts': d,
        'metric_shifts': w,
    }
    logger.debug(f"normalize_basis_0 完成：{point.coords[:3]}")
    return Frame(point, final + xstar + beta_t, M14_LABELS, stages)


def _model_mismatches(model, target, ctx):
    out = []
    for i in range(target.dim):
        for j in range(i, target.dim):
            actual, expected = model.form[i, j], target.form[i, j]
            if not ctx.equal(actual, expected):
                out.append({'where': 'form', 'idx': (i, j), 'expected': expected, 'actual': actual})
    for key, actual, expected in model.tensor.mismatches(target.tensor, ctx):
        out.append({'where': 'tensor', 'idx': key, 'expected': expected, 'actual': actual})
    return out


def _max_residual(model, target):
    worst = 0
    for i in range(target.dim):
        for j in range(target.dim):
            worst = max(worst, abs(model.form[i, j] - target.form[i, j]))
    for key in set(model.tensor.entries) | set(target.tensor.entries):
        worst = max(worst, abs(model.tensor.entries.get(key, 0) - target.tensor.entries.get(key, 0)))
    return worst


def verify_0_model(metric: PlaneWaveMetric, point, ctx=RATIONAL_CONTEXT) -> CheckReport:
    """正規化基底是否在該點重現 𝔐₁₄ 的內積與曲率"""
    try:
        frame = normalize_basis_0(metric, point, ctx)
    except HypothesisError as e:
        logger.info(f"verify_0_model：{e}")
        return CheckReport('0-model', False, Witness('normalization', (), note=str(e)),
                           details={'error': str(e)}, labels=M14_LABELS)
    ctx = metric_context(metric, ctx)
    model = frame_model(metric, frame, ctx)
    target = build_M14()
    mismatches = _model_mismatches(model, target, ctx)
    witness = None
    if mismatches:
        first = mismatches[0]
        kind = 'g' if first['where'] == 'form' else 'A'
        witness = Witness('frame-model-equals-M14', ((kind, tuple(first['idx'])),),
                          note=f"expected {first['expected']}, got {first['actual']}")
    labelled = [dict(m, idx=[M14_LABELS[i] for i in m['idx']]) for m in mismatches]
    stats = {
        'form_entries': target.dim * (target.dim + 1) // 2,
        'tensor_orbits': len(set(model.tensor.entries) | set(target.tensor.entries)),
        'max_residual': float(_max_residual(model, target)),
    }
    return CheckReport('0-model', not mismatches, witness, stats, labelled, labels=M14_LABELS)


def verify_0_model_points(metric: PlaneWaveMetric, points, ctx=RATIONAL_CONTEXT) -> CheckReport:
    """在多個點上執行 verify_0_model；回報第一個失敗的點"""
    worst, checked = 0.0, 0
    for coords in points:
        report = verify_0_model(metric, coords, ctx)
        checked += 1
        worst = max(worst, report.stats.get('max_residual', 0.0))
        if not report.holds:
            report.stats['points_checked'] = checked
            report.details['point'] = list(coords.coords if isinstance(coords, Point) else coords)
            return report
    return CheckReport('0-model', True, stats={'points_checked': checked, 'max_residual': worst},
                       labels=M14_LABELS)


def nabla_r_pattern(nabla, ctx=RATIONAL_CONTEXT):
    """列出 frame 中 ∇R(α, α, α, β; α) 違反 1-正規化條件的位置"""
    violations = []
    for p in range(3):
        for q in range(3):
            for r in range(3):
                for nu in range(6, 14):
                    for s in range(3):
                        key = (p, q, r, nu, s)
                        value = nabla(*key)
                        expected_nonzero = key in NABLA_PATTERN
                        if expected_nonzero == ctx.is_zero(value):
                            violations.append((key, value))
    return violations


def normalize_basis_1(metric: PlaneWaveMetric, point, ctx=RATIONAL_CONTEXT) -> Frame:
    frame = normalize_basis_0(metric, point, ctx)
    ctx = metric_context(metric, ctx)
    nabla = to_frame(covariant_derivative_R(metric, frame.point, 1), frame)
    violations = nabla_r_pattern(nabla, ctx)
    if violations:
        key, value = violations[0]
        names = ', '.join(M14_LABELS[i] for i in key[:4])
        raise HypothesisError(f"∇R({names}; {M14_LABELS[key[4]]}) = {value} 不符合 1-正規化條件")
    frame.stages['nabla_r'] = {'b11': nabla(0, 2, 2, 6, 0), 'b12': nabla(0, 1, 1, 7, 0)}
    return frame


def transform_frame(frame: Frame, t) -> Frame:
    """新基底第 j 個向量為 Σ_i T_ij · 舊基底第 i 個向量"""
    if t.dim != frame.size:
        raise ArityError(f"映射維度 {t.dim} 與 frame 大小 {frame.size} 不符")
    zero = frame.vectors[0][0] * 0
    vectors = []
    for j in range(frame.size):
        vec = [zero] * len(frame.vectors[0])
        for i in range(frame.size):
            vec = _axpy(vec, t.rows[i][j], frame.vectors[i])
        vectors.append(vec)
    return Frame(frame.point, vectors, frame.roles)


# Ξ

def xi_from_frame(metric: PlaneWaveMetric, frame: Frame, ctx=RATIONAL_CONTEXT) -> XiValue:
    """Ξ = ¼ (q_a − q_b)²，q = ∇²R(α₁,α,α,β;α₁,α₁) / ∇R(α₁,α,α,β;α₁)²"""
    d1 = covariant_derivative_R(metric, frame.point, 1)
    d2 = covariant_derivative_R(metric, frame.point, 2)
    quotients = []
    for alpha, beta in (('a2', 'b12'), ('a3', 'b11')):
        first = contract(d1, frame, ('a1', alpha, alpha, beta, 'a1'))
        if ctx.is_zero(first):
            raise HypothesisError(f"∇R(a1, {alpha}, {alpha}, {beta}; a1) 為零，Ξ 無定義")
        second = contract(d2, frame, ('a1', alpha, alpha, beta, 'a1', 'a1'))
        quotients.append(second / (first * first))
    value = (quotients[0] - quotients[1]) ** 2 / 4
    return XiValue(value, frame.point[0], FRAME, tuple(quotients), frame)


def xi_direct(family: PhiFamily, x1, ctx=RATIONAL_CONTEXT):
    """以 φ = φ₁,₁′ 計算 (1 − φφ″/φ′²)²"""
    phi, dphi, ddphi = (family.derivative((1, 1), k).evaluate([x1]) for k in (1, 2, 3))
    if ctx.is_zero(dphi):
        raise HypothesisError(f"φ₁,₁″({x1}) = 0，Ξ 無定義")
    q = phi * ddphi / (dphi * dphi)
    return XiValue((1 - q) ** 2, x1, DIRECT, (2 - q, q))


def xi_invariant(metric: PlaneWaveMetric, point, mode=FRAME, ctx=RATIONAL_CONTEXT) -> XiValue:
    ctx = metric_context(metric, ctx)
    point = coerce_point(point, ctx)
    if mode == DIRECT:
        if not isinstance(metric.family, PhiFamily):
            raise HypothesisError("direct 模式需要由 PhiFamily 建構的度量")
        return xi_direct(metric.family, point[0], ctx)
    if mode != FRAME:
        raise ExpressionFormatError(f"未知的 Ξ 模式：{mode}")
    frame = normalize_basis_1(metric, point, ctx)
    return xi_from_frame(metric, frame, ctx)


def xi_sweep(metric: PlaneWaveMetric, point, x1_values, mode=FRAME, ctx=RATIONAL_CONTEXT):
    ctx = metric_context(metric, ctx)
    base = coerce_point(point, ctx)
    values = []
    for x1 in x1_values:
        coords = list(base.coords)
        coords[0] = ctx.coerce(x1)
        values.append(xi_invariant(metric, Point(coords), mode, ctx))
    logger.debug(f"xi_sweep：{len(values)} 個點")
    return values


def xi_csv(values):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['x1', 'Xi'])
    for xi in values:
        writer.writerow([_csv_value(xi.x1), _csv_value(xi.value)])
    return buf.getvalue()


def _csv_value(v):
    return str(v) if isinstance(v, Fraction) else repr(float(v))


# 𝓜_A 的局部對稱判準

def symmetric_space_equations(family: AFamily):
    """三條方程的殘差（左式 − 右式）"""
    a = family.a
    return (
        a[(1, 1)] + a[(2, 2)] + a[(3, 1)] * a[(3, 2)] - 2,
        3 * a[(2, 1)] + 3 * a[(3, 1)] + 3 * a[(1, 1)] * a[(1, 2)] - 4,
        3 * a[(1, 2)] + 3 * a[(3, 2)] + 3 * a[(2, 1)] * a[(2, 2)] - 4,
    )


def symmetric_space_check(family: AFamily, ctx=RATIONAL_CONTEXT, rng=None, points: int = 5) -> CheckReport:
    """方程殘差與隨機點上的 ∇R 兩個獨立判定；兩者皆為零才成立"""
    metric = build_M_A(family)
    residuals = symmetric_space_equations(family)
    equations_hold = all(ctx.is_zero(r) for r in residuals)
    rng = rng if rng is not None else make_rng(0)
    worst, witness = 0, None
    for coords in random_points(rng, points, metric.dim, ctx):
        nabla = covariant_derivative_R(metric, Point(coords), 1)
        for key, value in sorted(nabla.nonzero(ctx).items()):
            if abs(value) > abs(worst):
                worst = value
            if witness is None:
                witness = Witness('nabla-r-vanishes', (('∇R', key),),
                                  note=f"{value} at {[str(c) for c in coords[:3]]}")
    nabla_holds = witness is None
    if equations_hold != nabla_holds:
        logger.warning(f"方程判定 {equations_hold} 與 ∇R 判定 {nabla_holds} 不一致")
    details = {
        'equations': list(SYMMETRIC_EQUATIONS),
        'residuals': list(residuals),
        'equations_hold': equations_hold,
        'nabla_r_vanishes': nabla_holds,
        'verdicts_agree': equations_hold == nabla_holds,
        'max_nabla_r': worst,
    }
    return CheckReport('locally-symmetric', equations_hold and nabla_holds, witness,
                       {'points': points}, details=details, labels=tuple(metric.coordinate_labels()))


def nabla_r_polynomials(family: AFamily, ctx=RATIONAL_CONTEXT):
    """由格點求值重建九個 ∇R 分量的一次式 c₀ + c₁x₁ + c₂x₂ + c₃x₃（x*、y 取 0）"""
    metric = build_M_A(family)
    zero, one = ctx.zero(), ctx.one()

    def sample(x):
        coords = [ctx.coerce(v) for v in x] + [zero] * (metric.dim - 3)
        nabla = covariant_derivative_R(metric, Point(coords), 1)
        return {c: ctx.coerce(nabla(*(i - 1 for i in c))) for c in NABLA_R_COMPONENTS}

    base = sample([zero] * 3)
    units = [sample([one if k == i else zero for k in range(3)]) for i in range(3)]
    coeffs = {c: [base[c]] + [units[i][c] - base[c] for i in range(3)] for c in NABLA_R_COMPONENTS}
    for x in _GRID_CHECKS:
        values = sample(x)
        for c, cs in coeffs.items():
            predicted = cs[0] + sum(k * v for k, v in zip(cs[1:], x))
            if not ctx.equal(predicted, values[c]):
                raise ConstraintError(f"∇R{c} 在 {x} 不是一次式：預期 {predicted}，得到 {values[c]}")
    polys = {}
    for c, cs in coeffs.items():
        expr = const(cs[0])
        for i, k in enumerate(cs[1:]):
            expr = add(expr, mul(const(k), var(i + 1)))
        polys[c] = expr
    return polys


def random_a_family(rng, ctx=RATIONAL_CONTEXT) -> AFamily:
    return AFamily({key: random_scalar(rng, ctx, bound=2) for key in FAMILY_KEYS})


def random_symmetric_family(rng, ctx=RATIONAL_CONTEXT) -> AFamily:
    """隨機取 a₁,₁、a₃,₁、a₃,₂，再解出其餘三個使三條方程成立"""
    while True:
        a11, a31, a32 = (random_scalar(rng, ctx, bound=2) for _ in range(3))
        a22 = 2 - a11 - a31 * a32
        det = 9 - 9 * a11 * a22
        if ctx.is_zero(det):
            continue
        rhs1, rhs2 = 4 - 3 * a31, 4 - 3 * a32
        a21 = (3 * rhs1 - 3 * a11 * rhs2) / det
        a12 = (3 * rhs2 - 3 * a22 * rhs1) / det
        return AFamily({(1, 1): a11, (1, 2): a12, (2, 1): a21, (2, 2): a22, (3, 1): a31, (3, 2): a32})
