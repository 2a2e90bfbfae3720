import logging
from itertools import permutations
from typing import NamedTuple

from src.models import ExpressionFormatError
from src.models.operators import BasisOperators, commutator, polarized_pairs, skew_pairs
from src.models.reports import CheckReport, Witness
from src.models.scalar import RATIONAL_CONTEXT
from src.utils import linalg

logger = logging.getLogger(__name__)

PROPERTY_KINDS = (
    'jacobi-tsankov',
    '2-step-jacobi-nilpotent',
    'skew-tsankov',
    '2-step-skew-nilpotent',
    'mixed-tsankov',
    'mixed-nilpotent-tsankov',
    'jacobi-square-zero',
)


class Subspace(NamedTuple):
    basis: list
    pivots: list

    @property
    def dim(self):
        return len(self.basis)


def validate_curvature_symmetries(tensor, ctx=RATIONAL_CONTEXT, labels=None):
    """檢查配對反對稱、配對交換與第一 Bianchi 恆等式"""
    name = 'curvature-symmetries'
    if tensor.violations:
        first = tensor.violations[0]
        return CheckReport(
            name, False,
            Witness(first['reason'], (('A', tuple(first['idx'])),)),
            stats={'violations': len(tensor.violations)},
            labels=labels,
        )

    # 非零的 Bianchi 和至少有一項非零，故只需檢查非零分量前三個索引的輪換
    candidates = set()
    for i, j, k, l in tensor.components:
        candidates.update({(i, j, k, l), (j, k, i, l), (k, i, j, l)})
    for idx in sorted(candidates):
        i, j, k, l = idx
        total = tensor(i, j, k, l) + tensor(j, k, i, l) + tensor(k, i, j, l)
        if not ctx.is_zero(total):
            logger.info(f"Bianchi 恆等式失敗於 {idx}，和為 {total}")
            return CheckReport(
                name, False,
                Witness('first-bianchi', (('A', idx),), note=f"cyclic sum = {total}"),
                stats={'bianchi_tuples': len(candidates)},
                details={'sum': total},
                labels=labels,
            )
    return CheckReport(name, True, stats={'bianchi_tuples': len(candidates),
                                          'orbits': len(tensor.entries)}, labels=labels)


def _first_failure(op, ctx):
    # 反例的作用對象取索引最大的非零行
    cols = op.nonzero_columns(ctx)
    if not cols:
        return None
    return cols[-1], tuple(op.column(cols[-1], ctx))


def product_order(n):
    """乘積檢查的算子順序：先單一基底向量 (i, i)，再極化配對，各自依索引由大到小"""
    return sorted(polarized_pairs(n), key=lambda p: (p[0] != p[1], -p[0], -p[1]))


def _scan(name, items, ctx, labels):
    """items 產生 (relation, operands, operator)；回傳第一個非零者的報告"""
    checked = 0
    for relation, operands, op in items:
        checked += 1
        hit = _first_failure(op, ctx)
        if hit is not None:
            target, residual = hit
            logger.info(f"{name} 失敗：{operands} 作用於 e{target + 1}")
            return CheckReport(name, False, Witness(relation, operands, target, residual),
                               stats={'pairs_checked': checked}, labels=labels)
    logger.debug(f"{name} 成立，共檢查 {checked} 組")
    return CheckReport(name, True, stats={'pairs_checked': checked}, labels=labels)


def _jacobi_tsankov(ops):
    pairs = polarized_pairs(ops.n)
    for a, p in enumerate(pairs):
        for q in pairs[a + 1:]:
            yield 'commutator', (('J', p), ('J', q)), commutator(ops.jacobi[p], ops.jacobi[q])


def _jacobi_nilpotent(ops):
    pairs = product_order(ops.n)
    for p in pairs:
        for q in pairs:
            yield 'product', (('J', p), ('J', q)), ops.jacobi[p] @ ops.jacobi[q]


def _skew_tsankov(ops):
    pairs = skew_pairs(ops.n)
    for a, p in enumerate(pairs):
        for q in pairs[a + 1:]:
            yield 'commutator', (('A', p), ('A', q)), commutator(ops.skew[p], ops.skew[q])


def _skew_nilpotent(ops):
    pairs = sorted(skew_pairs(ops.n), reverse=True)
    for p in pairs:
        for q in pairs:
            yield 'product', (('A', p), ('A', q)), ops.skew[p] @ ops.skew[q]


def _mixed_tsankov(ops):
    for p in skew_pairs(ops.n):
        for q in polarized_pairs(ops.n):
            yield 'commutator', (('A', p), ('J', q)), commutator(ops.skew[p], ops.jacobi[q])


def _mixed_nilpotent(ops):
    for p in sorted(skew_pairs(ops.n), reverse=True):
        for q in product_order(ops.n):
            yield 'product', (('A', p), ('J', q)), ops.skew[p] @ ops.jacobi[q]
            yield 'product', (('J', q), ('A', p)), ops.jacobi[q] @ ops.skew[p]


def _jacobi_square_zero(ops):
    # 𝒥(x)² = Σ x_a x_b x_c x_d 𝒥(e_a,e_b)𝒥(e_c,e_d)；逐一檢查每個單項式的係數
    n = ops.n
    products = {}

    def product(p, q):
        key = (p, q)
        if key not in products:
            products[key] = ops.jacobi_at(*p) @ ops.jacobi_at(*q)
        return products[key]

    for a in range(n):
        for b in range(a, n):
            for c in range(b, n):
                for d in range(c, n):
                    s = (a, b, c, d)
                    total = None
                    for perm in sorted(set(permutations(s))):
                        term = product(perm[:2], perm[2:])
                        total = term if total is None else total + term
                    yield 'square-coefficient', (('J', s),), total


_SCANNERS = {
    'jacobi-tsankov': _jacobi_tsankov,
    '2-step-jacobi-nilpotent': _jacobi_nilpotent,
    'skew-tsankov': _skew_tsankov,
    '2-step-skew-nilpotent': _skew_nilpotent,
    'mixed-tsankov': _mixed_tsankov,
    'mixed-nilpotent-tsankov': _mixed_nilpotent,
    'jacobi-square-zero': _jacobi_square_zero,
}


def check_property(m, kind, ops=None):
    """以基底極化窮舉檢查代數性質；失敗時附上第一個反例"""
    if kind not in _SCANNERS:
        raise ExpressionFormatError(f"未知的性質：{kind}（可用：{', '.join(PROPERTY_KINDS)}）")
    ops = ops or BasisOperators(m)
    return _scan(kind, _SCANNERS[kind](ops), m.ctx, m.labels)


def check_all_properties(m, kinds=PROPERTY_KINDS):
    ops = BasisOperators(m)
    return [check_property(m, kind, ops) for kind in kinds]


def invariant_spans(m, ops=None):
    """回傳 (V_{β,α*}, V_{α*})，皆為 RREF 基底"""
    ops = ops or BasisOperators(m)
    ctx = m.ctx
    first = []
    for op in ops.jacobi.values():
        for c in sorted({c for (_, c) in op.entries}):
            first.append(op.column(c, ctx))
    second = []
    for p in ops.jacobi.values():
        for q in ops.jacobi.values():
            pq = p @ q
            for c in sorted({c for (_, c) in pq.entries}):
                second.append(pq.column(c, ctx))
    big = Subspace(*linalg.span_basis(first, ctx))
    small = Subspace(*linalg.span_basis(second, ctx))
    logger.debug(f"不變子空間維度：V_beta_astar={big.dim}，V_astar={small.dim}")
    return big, small
