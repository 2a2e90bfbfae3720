import csv
import io
import logging
from fractions import Fraction

import numpy as np
from scipy.integrate import quad_vec, solve_ivp

from src.models import ArityError, QuadratureError
from src.models.expr import ZERO
from src.models.jet import Jet
from src.models.plane_wave import PlaneWaveMetric, Point
from src.utils.geometry import christoffel

logger = logging.getLogger(__name__)

EXACT_POLY = 'exact-poly'
ADAPTIVE = 'adaptive'
QUADRATURES = (EXACT_POLY, ADAPTIVE)
EPSABS = 1e-12


# 單變數多項式：係數串列，p[n] 為 tⁿ 的係數

def poly_add(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def poly_scale(p, s):
    return [c * s for c in p]


def poly_mul(p, q):
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            if b != 0:
                out[i + j] += a * b
    return out


def poly_derivative(p):
    return [c * n for n, c in enumerate(p)][1:]


def poly_integrate_twice(p, c0, c1):
    """回傳 q，q'' = p，q(0) = c0，q'(0) = c1"""
    out = [c0, c1]
    for n, c in enumerate(p):
        den = (n + 1) * (n + 2)
        out.append(Fraction(c, den) if isinstance(c, int) else c / den)
    return out


def poly_eval(p, t):
    total = 0
    for c in reversed(p):
        total = total * t + c
    return total


def _split(metric, values):
    a = metric.a
    return list(values[:a]), list(values[a:2 * a]), list(values[2 * a:])


def _check_lengths(metric, point, velocity):
    if len(point) != metric.dim or len(velocity) != metric.dim:
        raise ArityError(f"點與速度必須有 {metric.dim} 個分量")


def default_quadrature(metric):
    return EXACT_POLY if metric.max_degree() is not None else ADAPTIVE


class GeodesicSolution:
    """γ(0) = P、γ'(0) = v 的測地線，逐層求解 x → y → x*"""

    def __init__(self, metric: PlaneWaveMetric, point, velocity, quadrature=None):
        point = point.coords if isinstance(point, Point) else tuple(point)
        _check_lengths(metric, point, velocity)
        self.metric = metric
        self.point = tuple(point)
        self.velocity = tuple(velocity)
        self.quadrature = quadrature or default_quadrature(metric)
        if self.quadrature not in QUADRATURES:
            raise QuadratureError(f"未知的積分方式：{self.quadrature}")
        self.x0, self.xs0, self.y0 = _split(metric, self.point)
        self.vx, self.vxs, self.vy = _split(metric, self.velocity)
        self._derivatives = {}
        for i, j, mu, f in metric.psi_entries():
            for k in range(metric.a):
                df = f.diff(k + 1)
                if df != ZERO:
                    self._derivatives[(i, j, mu, k)] = df
        if self.quadrature == EXACT_POLY:
            degree = metric.max_degree()
            if degree is None:
                raise QuadratureError("exact-poly 只適用於多項式 ψ，請改用 adaptive")
            self._build_polynomials(degree)

    # exact-poly

    def _along_path(self, f, order):
        """f(x₀ + t·v_x) 的 t 多項式係數"""
        env = [Jet({(): x0, (0,): v}, order) for x0, v in zip(self.x0, self.vx)]
        value = f.evaluate(env)
        if not isinstance(value, Jet):
            return [value]
        zero = 0 * value.value
        return [value.coeffs.get((0,) * n, zero) for n in range(order + 1)]

    def _build_polynomials(self, degree):
        metric = self.metric
        a, b = metric.a, metric.b
        cinv = metric.C_inverse
        order = max(degree, 0)
        psi_t = {(i, j, mu): self._along_path(f, order) for i, j, mu, f in metric.psi_entries()}
        dpsi_t = {key: self._along_path(f, order) for key, f in self._derivatives.items()}

        y_polys = []
        for mu in range(b):
            source = []
            for (i, j, nu), p in psi_t.items():
                c = cinv[mu][nu]
                w = self.vx[i] * self.vx[j]
                if c != 0 and w != 0:
                    source = poly_add(source, poly_scale(p, c * w))
            y_polys.append(poly_integrate_twice(source, self.y0[mu], self.vy[mu]))
        ydot = [poly_derivative(p) for p in y_polys]

        # ẍ*_k = −Σ v_i v_j y_μ (2∂_iψ_jkμ − ∂_kψ_ijμ) − 2Σ v_i ψ_ikν ẏ_ν
        sources = [[] for _ in range(a)]
        for (p, q, mu, d), dp in dpsi_t.items():
            term = poly_mul(y_polys[mu], dp)
            if not term:
                continue
            w_shift = self.vx[d] * self.vx[p]
            if w_shift != 0:
                sources[q] = poly_add(sources[q], poly_scale(term, -2 * w_shift))
            w_grad = self.vx[p] * self.vx[q]
            if w_grad != 0:
                sources[d] = poly_add(sources[d], poly_scale(term, w_grad))
        for (i, k, nu), p in psi_t.items():
            if self.vx[i] != 0:
                sources[k] = poly_add(sources[k], poly_scale(poly_mul(p, ydot[nu]), -2 * self.vx[i]))
        xs_polys = [poly_integrate_twice(sources[k], self.xs0[k], self.vxs[k]) for k in range(a)]
        self.y_polys = y_polys
        self.xs_polys = xs_polys
        logger.debug(f"exact-poly 測地線：y 次數 ≤ {max((len(p) for p in y_polys), default=0) - 1}")

    # adaptive

    def _psi_values(self, s):
        x = [x0 + s * v for x0, v in zip(self.x0, self.vx)]
        return x, {(i, j, mu): f.evaluate(x) for i, j, mu, f in self.metric.psi_entries()}

    def _y_source(self, s):
        _, values = self._psi_values(s)
        cinv = self.metric.C_inverse
        out = np.zeros(self.metric.b)
        for (i, j, nu), value in values.items():
            w = self.vx[i] * self.vx[j]
            if w == 0:
                continue
            for mu in range(self.metric.b):
                c = cinv[mu][nu]
                if c != 0:
                    out[mu] += float(c) * float(w) * float(value)
        return out

    def _quad(self, f, upper):
        """∫₀^upper f(s) ds，以 s = τ·upper 換到 [0, 1]"""
        if upper == 0:
            return None
        res, err, info = quad_vec(lambda tau: upper * f(tau * upper), 0.0, 1.0,
                                  epsabs=EPSABS, full_output=True)
        if not info.success:
            raise QuadratureError(f"adaptive 積分未收斂：估計誤差 {err}")
        return res

    def _y_state(self, t):
        y0 = np.array([float(v) for v in self.y0])
        vy = np.array([float(v) for v in self.vy])
        if t == 0:
            return y0, vy
        t = float(t)
        # Cauchy 重積分：y(t) = y₀ + t·ẏ₀ + ∫₀ᵗ (t − s) f(s) ds
        y = y0 + t * vy + self._quad(lambda s: (t - s) * self._y_source(s), t)
        ydot = vy + self._quad(self._y_source, t)
        return y, ydot

    def _xs_source(self, s):
        metric = self.metric
        x = [x0 + s * v for x0, v in zip(self.x0, self.vx)]
        y, ydot = self._y_state(s)
        out = np.zeros(metric.a)
        # df = ∂_d ψ_pqμ，同時出現在 ∂_iψ_jkμ (i=d, j=p, k=q) 與 ∂_kψ_ijμ (k=d) 兩項
        for (p, q, mu, d), df in self._derivatives.items():
            if y[mu] == 0:
                continue
            value = float(df.evaluate(x)) * y[mu]
            if value == 0:
                continue
            out[q] -= 2 * float(self.vx[d] * self.vx[p]) * value
            out[d] += float(self.vx[p] * self.vx[q]) * value
        for i, k, nu, f in metric.psi_entries():
            if self.vx[i] == 0 or ydot[nu] == 0:
                continue
            out[k] -= 2 * float(self.vx[i]) * float(f.evaluate(x)) * ydot[nu]
        return out

    # 對外介面

    def position(self, t):
        metric = self.metric
        x = [x0 + t * v for x0, v in zip(self.x0, self.vx)]
        if self.quadrature == EXACT_POLY:
            y = [poly_eval(p, t) for p in self.y_polys]
            xs = [poly_eval(p, t) for p in self.xs_polys]
            return Point.from_parts(x, xs, y)
        y, _ = self._y_state(t)
        xs0 = np.array([float(v) for v in self.xs0])
        vxs = np.array([float(v) for v in self.vxs])
        if t == 0:
            xs = xs0
        else:
            tf = float(t)
            xs = xs0 + tf * vxs + self._quad(lambda s: (tf - s) * self._xs_source(s), tf)
        return Point.from_parts([float(v) for v in x], xs.tolist(), y.tolist())

    def state(self, t):
        """回傳 (位置, 速度, 加速度)"""
        pos = self.position(t)
        vx = list(self.vx)
        ax = [0 * v for v in self.vx]
        if self.quadrature == EXACT_POLY:
            vel_y = [poly_eval(poly_derivative(p), t) for p in self.y_polys]
            vel_xs = [poly_eval(poly_derivative(p), t) for p in self.xs_polys]
            acc_y = [poly_eval(poly_derivative(poly_derivative(p)), t) for p in self.y_polys]
            acc_xs = [poly_eval(poly_derivative(poly_derivative(p)), t) for p in self.xs_polys]
        else:
            _, ydot = self._y_state(t)
            vel_y = ydot.tolist()
            vxs = np.array([float(v) for v in self.vxs])
            if t == 0:
                vel_xs = vxs.tolist()
            else:
                vel_xs = (vxs + self._quad(self._xs_source, float(t))).tolist()
            acc_y = self._y_source(float(t)).tolist()
            acc_xs = self._xs_source(float(t)).tolist()
            vx = [float(v) for v in vx]
            ax = [0.0] * len(vx)
        return pos, vx + vel_xs + vel_y, ax + acc_xs + acc_y


def geodesic(metric: PlaneWaveMetric, point, velocity, t, quadrature=None) -> Point:
    return GeodesicSolution(metric, point, velocity, quadrature).position(t)


def geodesic_trace(metric, point, velocity, times, quadrature=None):
    sol = GeodesicSolution(metric, point, velocity, quadrature)
    return [(t, sol.position(t)) for t in times]


def trace_to_csv(metric, trace):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['t'] + metric.coordinate_labels())
    for t, pos in trace:
        writer.writerow([_csv_value(t)] + [_csv_value(v) for v in pos.coords])
    return buf.getvalue()


def _csv_value(v):
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def geodesic_residual(metric, solution: GeodesicSolution, times):
    """max |γ̈^a + Σ Γ^a_bc γ̇^b γ̇^c|，Γ 取在 γ(t) 上"""
    worst = 0
    for t in times:
        pos, vel, acc = solution.state(t)
        gamma = christoffel(metric, pos)
        residual = list(acc)
        for (b, c, a), value in gamma.components.items():
            if vel[b] != 0 and vel[c] != 0:
                residual[a] += value * vel[b] * vel[c]
        worst = max([worst] + [abs(r) for r in residual])
    return worst


def exp_inverse(metric: PlaneWaveMetric, point, target, quadrature=None):
    """回傳 v 使 geodesic(P, v, 1) = Q：依 x → y → x* 逐層反解"""
    p = point.coords if isinstance(point, Point) else tuple(point)
    q = target.coords if isinstance(target, Point) else tuple(target)
    a = metric.a
    px, ps, py = _split(metric, p)
    qx, qs, qy = _split(metric, q)
    vx = [b - c for b, c in zip(qx, px)]
    zero_s = [0 * v for v in ps]
    zero_y = [0 * v for v in py]
    # y 的積分項只依賴 v_x
    reach = geodesic(metric, p, vx + zero_s + zero_y, 1, quadrature)
    iy = [r - c for r, c in zip(reach.y(a), py)]
    vy = [b - c - i for b, c, i in zip(qy, py, iy)]
    # x* 的積分項依賴 v_x 與 v_y，與 v_{x*} 無關
    reach = geodesic(metric, p, vx + zero_s + vy, 1, quadrature)
    i_s = [r - c for r, c in zip(reach.xstar(a), ps)]
    vs = [b - c - i for b, c, i in zip(qs, ps, i_s)]
    return vx + vs + vy


def integrate_geodesic(metric: PlaneWaveMetric, point, velocity, t, rtol=1e-11, atol=1e-12):
    """以 scipy RK45 直接積分完整測地線方程，作為獨立對照"""
    point = point.coords if isinstance(point, Point) else tuple(point)
    _check_lengths(metric, point, velocity)
    n = metric.dim

    def rhs(_, state):
        pos = [float(v) for v in state[:n]]
        vel = state[n:]
        gamma = christoffel(metric, pos)
        acc = np.zeros(n)
        for (b, c, a), value in gamma.components.items():
            acc[a] -= float(value) * vel[b] * vel[c]
        return np.concatenate([vel, acc])

    state0 = np.array([float(v) for v in point] + [float(v) for v in velocity])
    if t == 0:
        return Point(state0[:n].tolist())
    result = solve_ivp(rhs, (0.0, float(t)), state0, method='RK45', rtol=rtol, atol=atol)
    if not result.success:
        raise QuadratureError(f"RK45 積分失敗：{result.message}")
    logger.debug(f"RK45 完成：{result.nfev} 次右端求值")
    return Point(result.y[:n, -1].tolist())
