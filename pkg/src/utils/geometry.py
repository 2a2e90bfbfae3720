import logging
from fractions import Fraction

from src.models import ArityError
from src.models.curvature import CurvatureTensor, canonical_index, orbit
from src.models.expr import jet_eval
from src.models.forms import BilinearForm
from src.models.jet import Jet
from src.models.plane_wave import CoordTensor, Frame, PlaneWaveMetric, Point
from src.models.scalar import RATIONAL_CONTEXT
from src.utils import linalg

logger = logging.getLogger(__name__)

FIRST = 'first'
SECOND = 'second'


def _as_point(point):
    return point if isinstance(point, Point) else Point(point)


def _zero_like(point):
    return 0.0 if any(isinstance(v, float) for v in point.coords) else Fraction(0)


# ψ 與座標的 Jet

def psi_jets(metric: PlaneWaveMetric, point, order: int):
    """{(i, j): [Jet 或 None]}，含兩種索引順序；Jet 變數即座標索引 x_0..x_{a-1}"""
    point = _as_point(point)
    x = list(point.x(metric.a))
    dirs = list(range(1, metric.a + 1))
    jets = {}
    for (i, j), vec in metric.psi.items():
        row = [None if f.degree() == 0 and f.evaluate(x) == 0 else jet_eval(f, x, dirs, order)
               for f in vec]
        jets[(i, j)] = row
        jets[(j, i)] = row
    return jets


def y_jets(metric: PlaneWaveMetric, point, order: int):
    point = _as_point(point)
    return [Jet.variable(metric.y_index(mu), point[metric.y_index(mu)], order) for mu in range(metric.b)]


def _psi(jets, i, j, mu):
    row = jets.get((i, j))
    return row[mu] if row else None


def _d(jet, *indices):
    for i in indices:
        if jet is None:
            return None
        jet = jet.derivative(i)
        if not jet.coeffs:
            return None
    return jet


def _sum(terms):
    terms = [t for t in terms if t is not None]
    if not terms:
        return None
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total if total.coeffs else None


def _scaled(jet, factor):
    if jet is None or factor == 0:
        return None
    return jet * factor


def _times(a, b):
    if a is None or b is None:
        return None
    out = a * b
    return out if out.coeffs else None


# 度量

def metric_at(metric: PlaneWaveMetric, point) -> BilinearForm:
    """g(∂x_i, ∂x_j) = 2Σ y_μ ψ_ijμ，g(∂x_i, ∂x_i*) = 1，g(∂y) = C"""
    point = _as_point(point)
    a, n = metric.a, metric.dim
    zero = _zero_like(point)
    one = zero + 1
    g = [[zero] * n for _ in range(n)]
    x = list(point.x(a))
    y = point.y(a)
    for (i, j), vec in metric.psi.items():
        value = zero
        for mu, f in enumerate(vec):
            if y[mu] != 0:
                value += 2 * y[mu] * f.evaluate(x)
        g[i][j] = g[j][i] = value
    for i in range(a):
        g[i][a + i] = g[a + i][i] = one
    for mu in range(metric.b):
        for nu in range(metric.b):
            g[2 * a + mu][2 * a + nu] = metric.C[mu, nu] + zero
    return BilinearForm(g)


def metric_jet(metric: PlaneWaveMetric, point, order: int):
    """度量分量的 Jet 矩陣（None 代表恆為零）"""
    point = _as_point(point)
    a, n = metric.a, metric.dim
    psi = psi_jets(metric, point, order)
    ys = y_jets(metric, point, order)
    g = [[None] * n for _ in range(n)]
    for (i, j) in metric.psi:
        g[i][j] = g[j][i] = _sum(
            _times(ys[mu], _scaled(_psi(psi, i, j, mu), 2)) for mu in range(metric.b))
    one = _zero_like(point) + 1
    for i in range(a):
        g[i][a + i] = g[a + i][i] = Jet.constant(one, order)
    for mu in range(metric.b):
        for nu in range(metric.b):
            if metric.C[mu, nu] != 0:
                g[2 * a + mu][2 * a + nu] = Jet.constant(metric.C[mu, nu] + _zero_like(point), order)
    return g


# Christoffel 符號（封閉形式）

def _christoffel_jets(metric, psi, ys, kind):
    """第一類鍵為 (b, c, d) = g(∇_b ∂_c, ∂_d)；第二類鍵為 (b, c, a)，∇_b ∂_c = Σ Γ^a ∂_a"""
    a, b = metric.a, metric.b
    out = {}
    for i in range(a):
        for j in range(a):
            for k in range(a):
                value = _sum(
                    _times(ys[mu], _sum([
                        _d(_psi(psi, j, k, mu), i),
                        _d(_psi(psi, i, k, mu), j),
                        _scaled(_d(_psi(psi, i, j, mu), k), -1),
                    ]))
                    for mu in range(b))
                if value is not None:
                    target = k if kind == FIRST else metric.xstar_index(k)
                    out[(i, j, target)] = value
            for nu in range(b):
                if kind == FIRST:
                    value = _scaled(_psi(psi, i, j, nu), -1)
                else:
                    cinv = metric.C_inverse
                    value = _sum(_scaled(_psi(psi, i, j, lam), -cinv[nu][lam]) for lam in range(b))
                if value is not None:
                    out[(i, j, metric.y_index(nu))] = value
    for i in range(a):
        for k in range(a):
            target = k if kind == FIRST else metric.xstar_index(k)
            for nu in range(b):
                value = _psi(psi, i, k, nu)
                if value is not None:
                    out[(i, metric.y_index(nu), target)] = value
                    out[(metric.y_index(nu), i, target)] = value
    return out


def _values(jets):
    return {key: jet.value for key, jet in jets.items() if jet is not None and jet.value != 0}


def christoffel(metric: PlaneWaveMetric, point, kind: str = SECOND) -> CoordTensor:
    point = _as_point(point)
    psi = psi_jets(metric, point, 1)
    ys = y_jets(metric, point, 1)
    jets = _christoffel_jets(metric, psi, ys, kind)
    return CoordTensor(metric.dim, 3, 0, _values(jets))


# 曲率（封閉形式）

def _curvature_jets(metric, psi, ys):
    """R_abcd = g(R(∂_a, ∂_b)∂_c, ∂_d)，R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y]；回傳完整分量"""
    a, b = metric.a, metric.b
    cinv = metric.C_inverse
    canonical = {}
    for i in range(a):
        for j in range(i + 1, a):
            for k in range(a):
                for nu in range(b):
                    value = _sum([_scaled(_d(_psi(psi, j, k, nu), i), -1), _d(_psi(psi, i, k, nu), j)])
                    if value is not None:
                        canonical[(i, j, k, metric.y_index(nu))] = value
    for idx in _canonical_quadruples(a):
        i, j, k, l = idx
        terms = []
        for mu in range(b):
            bracket = _sum([
                _d(_psi(psi, j, l, mu), i, k),
                _d(_psi(psi, i, k, mu), j, l),
                _scaled(_d(_psi(psi, j, k, mu), i, l), -1),
                _scaled(_d(_psi(psi, i, l, mu), j, k), -1),
            ])
            terms.append(_times(ys[mu], bracket))
        for mu in range(b):
            for nu in range(b):
                c = cinv[mu][nu]
                if c == 0:
                    continue
                quad = _sum([
                    _times(_psi(psi, i, k, nu), _psi(psi, j, l, mu)),
                    _scaled(_times(_psi(psi, j, k, nu), _psi(psi, i, l, mu)), -1),
                ])
                terms.append(_scaled(quad, c))
        value = _sum(terms)
        if value is not None:
            canonical[idx] = value
    return _expand_orbits(canonical)


def _canonical_quadruples(a):
    for i in range(a):
        for j in range(a):
            for k in range(a):
                for l in range(a):
                    if canonical_index((i, j, k, l))[0] == (i, j, k, l):
                        yield (i, j, k, l)


def _expand_orbits(canonical):
    full = {}
    for key, value in canonical.items():
        for idx, sign in orbit(key).items():
            full[idx] = value if sign > 0 else -value
    return full


def curvature_at(metric: PlaneWaveMetric, point) -> CoordTensor:
    point = _as_point(point)
    psi = psi_jets(metric, point, 2)
    ys = y_jets(metric, point, 2)
    comps = _values(_curvature_jets(metric, psi, ys))
    logger.debug(f"curvature_at：{len(comps)} 個非零分量")
    return CoordTensor(metric.dim, 4, 0, comps)


def as_curvature_tensor(tensor: CoordTensor) -> CurvatureTensor:
    """(4,0) 座標張量轉成依軌道儲存的 CurvatureTensor"""
    return CurvatureTensor.from_components(tensor.dim, tensor.components.items())


# ∇ᵏR

def _nabla(components, gamma_by_out):
    """(∇T)_{s,e} = ∂_e T_s − Σ_p Σ_f Γ^f_{e s_p} T_{s[p→f]}，以 push 方式累加"""
    out = {}

    def push(key, jet):
        if key in out:
            out[key] = out[key] + jet
        else:
            out[key] = jet

    for t, jet in components.items():
        variables = {v for key in jet.coeffs for v in key}
        for e in variables:
            d = jet.derivative(e)
            if d.coeffs:
                push(t + (e,), d)
        target_order = jet.order - 1
        for p, f in enumerate(t):
            for e, c, gamma in gamma_by_out.get(f, ()):
                term = (gamma * jet).truncate(target_order)
                if term.coeffs:
                    push(t[:p] + (c,) + t[p + 1:] + (e,), -term)
    return {k: v for k, v in out.items() if v.coeffs}


def covariant_derivative_R(metric: PlaneWaveMetric, point, k: int = 1) -> CoordTensor:
    """k 階協變導數 ∇ᵏR；微分槽依序接在四個曲率槽之後"""
    if k < 0:
        raise ArityError(f"k 必須非負：{k}")
    point = _as_point(point)
    psi = psi_jets(metric, point, k + 2)
    ys = y_jets(metric, point, k + 2)
    gamma = _christoffel_jets(metric, psi, ys, SECOND)
    gamma_by_out = {}
    for (e, c, f), jet in gamma.items():
        gamma_by_out.setdefault(f, []).append((e, c, jet))
    components = {key: jet.truncate(k) for key, jet in _curvature_jets(metric, psi, ys).items()}
    for step in range(k):
        components = _nabla(components, gamma_by_out)
        logger.debug(f"∇^{step + 1}R：{len(components)} 個分量")
    return CoordTensor(metric.dim, 4, k, _values(components))


# 通用路徑（Koszul 公式），作為封閉形式的對照

def _jm_mul(x, y, order):
    n = len(x)
    out = [[None] * n for _ in range(n)]
    for r in range(n):
        for t in range(n):
            if x[r][t] is None:
                continue
            for c in range(n):
                if y[t][c] is None:
                    continue
                term = x[r][t] * y[t][c]
                out[r][c] = term if out[r][c] is None else out[r][c] + term
    for r in range(n):
        for c in range(n):
            if out[r][c] is not None and not out[r][c].coeffs:
                out[r][c] = None
    return out


def inverse_metric_jet(g, order, ctx=RATIONAL_CONTEXT):
    """g⁻¹ = Σ (−g₀⁻¹H)ⁿ g₀⁻¹，H 為 g 的非常數部分"""
    n = len(g)
    g0 = [[(g[r][c].value if g[r][c] is not None else ctx.zero()) for c in range(n)] for r in range(n)]
    g0inv = linalg.inverse(g0, ctx)
    g0inv_jet = [[Jet.constant(v, order) if v != 0 else None for v in row] for row in g0inv]
    h = [[None] * n for _ in range(n)]
    for r in range(n):
        for c in range(n):
            if g[r][c] is not None:
                rest = Jet({key: v for key, v in g[r][c].coeffs.items() if key}, order)
                h[r][c] = rest if rest.coeffs else None
    step = _jm_mul(g0inv_jet, h, order)
    step = [[(-v if v is not None else None) for v in row] for row in step]
    result = g0inv_jet
    power = g0inv_jet
    for _ in range(order):
        power = _jm_mul(step, power, order)
        result = [[_sum([p, q]) for p, q in zip(rr, pr)] for rr, pr in zip(result, power)]
    return result


def _generic_christoffel_jets(metric, point, order, ctx):
    g = metric_jet(metric, point, order + 1)
    n = metric.dim
    first = {}
    for b in range(n):
        for c in range(n):
            for d in range(n):
                value = _sum([_d(g[c][d], b), _d(g[b][d], c), _scaled(_d(g[b][c], d), -1)])
                if value is not None:
                    first[(b, c, d)] = value * Fraction(1, 2) if ctx.exact else value * 0.5
    ginv = inverse_metric_jet(g, order, ctx)
    second = {}
    for (b, c, d), value in first.items():
        for a in range(n):
            term = _times(ginv[a][d], value)
            if term is not None:
                key = (b, c, a)
                second[key] = term if key not in second else second[key] + term
    return first, {k: v for k, v in second.items() if v.coeffs}


def christoffel_generic(metric: PlaneWaveMetric, point, kind: str = SECOND,
                        ctx=RATIONAL_CONTEXT) -> CoordTensor:
    point = _as_point(point)
    first, second = _generic_christoffel_jets(metric, point, 0, ctx)
    return CoordTensor(metric.dim, 3, 0, _values(first if kind == FIRST else second))


def curvature_generic(metric: PlaneWaveMetric, point, ctx=RATIONAL_CONTEXT) -> CoordTensor:
    """R = ∂Γ − ∂Γ + ΓΓ − ΓΓ，再以 g 降指標"""
    point = _as_point(point)
    n = metric.dim
    _, gamma = _generic_christoffel_jets(metric, point, 1, ctx)
    g = metric_at(metric, point).entries
    by_bc = {}
    for (b, c, a), jet in gamma.items():
        by_bc.setdefault((b, c), []).append((a, jet))

    # up[(i, j, k)][e]：R(∂_i, ∂_j)∂_k 的 ∂_e 分量
    up = {}

    def add(key, e, value):
        if value == 0:
            return
        slot = up.setdefault(key, {})
        slot[e] = slot.get(e, 0) + value

    for (j, k), outs in by_bc.items():
        for e, jet in outs:
            for i in {v for key in jet.coeffs for v in key}:
                dv = jet.derivative(i).value
                add((i, j, k), e, dv)
                add((j, i, k), e, -dv)
    for (j, k), outs in by_bc.items():
        for f, g_jk in outs:
            for i in range(n):
                for e, g_if in by_bc.get((i, f), ()):
                    v = g_jk.value * g_if.value
                    add((i, j, k), e, v)
                    add((j, i, k), e, -v)
    comps = {}
    for (i, j, k), vec in up.items():
        for l in range(n):
            total = sum((v * g[e][l] for e, v in vec.items() if g[e][l] != 0), 0)
            if total != 0:
                comps[(i, j, k, l)] = total
    return CoordTensor(n, 4, 0, comps)


# 與 frame 收縮

def contract(tensor: CoordTensor, frame: Frame, slots):
    """多線性收縮 T(v₁, …, v_r)；slots 為角色名稱、frame 索引或座標向量"""
    if len(slots) != tensor.rank:
        raise ArityError(f"張量有 {tensor.rank} 個槽，卻給了 {len(slots)} 個向量")
    vectors = [s if isinstance(s, (list, tuple)) else frame.vector(s) for s in slots]
    total = 0
    for idx, value in tensor.components.items():
        term = value
        for v, i in zip(vectors, idx):
            if v[i] == 0:
                term = 0
                break
            term = term * v[i]
        if term != 0:
            total += term
    return total


def to_frame(tensor: CoordTensor, frame: Frame) -> CoordTensor:
    """一次算出所有 frame 分量：逐槽以 frame 矩陣收縮"""
    # rows[c] = 座標 c 在各 frame 向量中的 (frame 索引, 分量)
    rows = {}
    for r, vec in enumerate(frame.vectors):
        for c, v in enumerate(vec):
            if v != 0:
                rows.setdefault(c, []).append((r, v))
    current = dict(tensor.components)
    for slot in range(tensor.rank):
        nxt = {}
        for idx, value in current.items():
            for r, v in rows.get(idx[slot], ()):
                key = idx[:slot] + (r,) + idx[slot + 1:]
                nxt[key] = nxt.get(key, 0) + value * v
        current = {k: v for k, v in nxt.items() if v != 0}
    return CoordTensor(frame.size, tensor.covariant, tensor.derivative, current)


def frame_form(metric: PlaneWaveMetric, frame: Frame) -> BilinearForm:
    """g_P 在 frame 中的 Gram 矩陣"""
    g = metric_at(metric, frame.point).entries
    m = frame.matrix()
    return BilinearForm(linalg.mat_mul(linalg.transpose(m), linalg.mat_mul(g, m)))
