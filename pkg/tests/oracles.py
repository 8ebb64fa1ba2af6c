"""
Exact-rational reference implementations

Direct evaluation of the CUSUM functionals and statistics in
fractions.Fraction arithmetic, used to check the vectorised code.
"""

import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

MAXABS, RANGE, VARTYPE = 1, 2, 3


def exact(values: Sequence[float]) -> List[Fraction]:
    return [Fraction(float(v)) for v in values]


def _reduce(partial: List[Fraction], functional: int) -> Fraction:
    if functional == MAXABS:
        return max(abs(s) for s in partial)
    if functional == RANGE:
        return max(partial) - min(partial)
    total = sum(partial, Fraction(0))
    return sum((s * s for s in partial), Fraction(0)) - total * total / len(partial)


def forward(x: List[Fraction], k: int, functional: int) -> Fraction:
    """S_i = sum_{j=1..i} (x_j - mean(x_1..x_k)), i = 1..k"""
    mean = sum(x[:k], Fraction(0)) / k
    partial, running = [], Fraction(0)
    for j in range(k):
        running += x[j] - mean
        partial.append(running)
    return _reduce(partial, functional)


def backward(x: List[Fraction], k: int, functional: int) -> Fraction:
    """R_i = sum_{j=i..n} (x_j - mean(x_{k+1}..x_n)), i = k+1..n"""
    n = len(x)
    mean = sum(x[k:], Fraction(0)) / (n - k)
    partial, running = [], Fraction(0)
    for j in range(n - 1, k - 1, -1):
        running += x[j] - mean
        partial.append(running)
    return _reduce(partial[::-1], functional)


def trimmed_range(n: int, delta: str) -> Tuple[int, int]:
    nd = n * Fraction(delta)
    return max(1, math.ceil(nd)), min(n - 1, math.floor(n - nd))


def scan(x: List[Fraction], delta: str, functional: int) -> List[Tuple[int, Fraction, Fraction]]:
    """(k, forward, backward) over the trimmed range"""
    k_lo, k_hi = trimmed_range(len(x), delta)
    return [(k, forward(x, k, functional), backward(x, k, functional)) for k in range(k_lo, k_hi + 1)]


def ratio_sup(rows: List[Tuple[int, Fraction, Fraction]], swap: bool = False
              ) -> Tuple[Optional[Fraction], int]:
    """(sup, smallest argmax k) over defined ratios; sup None means +inf"""
    best, best_k = None, None
    for k, num, den in rows:
        if swap:
            num, den = den, num
        if den == 0:
            if num > 0:
                return None, k
            continue
        ratio = num / den
        if best is None or ratio > best:
            best, best_k = ratio, k
    return best, best_k


def classical(x: List[Fraction], functional: int, sigma2: Fraction) -> float:
    n = len(x)
    mean = sum(x, Fraction(0)) / n
    partial, running = [], Fraction(0)
    for value in x:
        running += value - mean
        partial.append(running)
    if functional == VARTYPE:
        return float(_reduce(partial, VARTYPE) / (n * n * sigma2))
    return float(_reduce(partial, functional)) / math.sqrt(n * float(sigma2))
