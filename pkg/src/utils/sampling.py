import random
import logging
from fractions import Fraction

logger = logging.getLogger(__name__)

# 所有隨機取樣都經由以種子建立的獨立串流，同一種子保證結果可重現


def make_rng(seed: int = 0):
    return random.Random(seed)


def random_fraction(rng, bound: int = 5, max_den: int = 4, nonzero: bool = False):
    while True:
        value = Fraction(rng.randint(-bound * max_den, bound * max_den), rng.randint(1, max_den))
        if value != 0 or not nonzero:
            return value


def random_scalar(rng, ctx, bound: int = 5, max_den: int = 4, nonzero: bool = False):
    if ctx.exact:
        return random_fraction(rng, bound, max_den, nonzero)
    while True:
        value = rng.uniform(-bound, bound)
        if not nonzero or abs(value) > 1e-3:
            return value


def random_vector(rng, n: int, ctx, bound: int = 5, max_den: int = 4):
    return [random_scalar(rng, ctx, bound, max_den) for _ in range(n)]


def random_sparse_vector(rng, n: int, ctx, density: float = 0.3):
    v = [ctx.zero()] * n
    for i in range(n):
        if rng.random() < density:
            v[i] = random_scalar(rng, ctx, nonzero=True)
    return v


def random_points(rng, count: int, n: int, ctx, bound: int = 3):
    points = [random_vector(rng, n, ctx, bound) for _ in range(count)]
    logger.debug(f"產生 {count} 個 {n} 維隨機點")
    return points


def frange(start, stop, step):
    """含端點的等距格點；以整數步數計算以避免累積誤差"""
    if step <= 0:
        raise ValueError(f"step 必須為正：{step}")
    count = int(round((stop - start) / step))
    return [start + k * step for k in range(count + 1)]
