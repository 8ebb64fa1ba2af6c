#!/usr/bin/env python3
"""
CUSUM Functionals and Ratio Statistics

Forward functionals work on the first k observations centered at their own
mean; backward functionals on the last n-k observations centered at theirs.
Ratio statistics take the maximum over the trimmed range of k of
forward/backward (V), backward/forward (Z) or the larger of the two (TMAX).
The classical statistics scale the full-sample CUSUM by a Bartlett
long-run variance estimate.

Key Features:
- All-k evaluation in vectorised blocks (RATIOCUSUM_BLOCK_ROWS rows at a time)
- Exact detection of constant segments, so 0/0 and x/0 never depend on rounding
- Backward quantities computed as forward quantities of the reversed series,
  which makes Z(x) and V(reversed x) the same arithmetic
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from .config import get_config
from .exceptions import AllDegenerate, EmptyRange, InvalidKind, InvalidSpec, ZeroVariance
from .models import (
    Family,
    Functional,
    LongRunVariance,
    RatioCurve,
    Series,
    StatisticResult,
    StatKind,
    trim_fraction,
)

logger = logging.getLogger(__name__)

# tolerance when turning n*delta into an integer bound
_ROUNDING_SLACK = 1e-9

# ============================================
# TRIMMED RANGE
# ============================================

def k_range(n: int, delta: float) -> Tuple[int, int]:
    """
    Trimmed range of candidate change points

    Args:
        n: Series length (>= 2)
        delta: Trim fraction in (0, 1/2)

    Returns:
        (k_lo, k_hi) with k_lo = ceil(n*delta), k_hi = floor(n*(1-delta)),
        clamped to 1..n-1

    Raises:
        EmptyRange: If k_lo > k_hi
    """
    delta = trim_fraction(delta)
    if n < 2:
        raise EmptyRange(f"Series length {n} leaves no candidate change points")
    k_lo = max(1, math.ceil(n * delta - _ROUNDING_SLACK))
    # floor(n - n*delta) == n - ceil(n*delta); written this way the range is symmetric
    k_hi = min(n - 1, n - math.ceil(n * delta - _ROUNDING_SLACK))
    if k_lo > k_hi:
        raise EmptyRange(f"No candidate change points for n={n}, delta={delta}: [{k_lo}, {k_hi}]")
    return k_lo, k_hi


# ============================================
# SINGLE-k FUNCTIONALS
# ============================================

def forward_functional(x, k: int, functional: Functional) -> float:
    """
    CUSUM functional of x_1..x_k centered at their mean

    With S_i = sum_{j<=i} (x_j - mean(x_1..x_k)), i = 1..k:
    MAXABS -> max |S_i|, RANGE -> max S_i - min S_i,
    VARTYPE -> sum S_i^2 - (sum S_i)^2 / k.
    """
    values = Series.of(x).values
    n = values.size
    if not 1 <= k <= n:
        raise InvalidSpec(f"k must lie in 1..{n}, got {k}")
    segment = values[:k]
    if np.all(segment == segment[0]):
        return 0.0
    partial = np.cumsum(segment - segment.mean())
    return _reduce(partial, functional, k)


def backward_functional(x, k: int, functional: Functional) -> float:
    """
    CUSUM functional of x_{k+1}..x_n built from tail sums

    R_i = sum_{j=i..n} (x_j - mean(x_{k+1}..x_n)), i = k+1..n. Evaluated as
    the forward functional of the reversed series at n-k.
    """
    values = Series.of(x).values
    n = values.size
    if not 1 <= k <= n - 1:
        raise InvalidSpec(f"k must lie in 1..{n - 1}, got {k}")
    return forward_functional(values[::-1], n - k, functional)


def _reduce(partial: np.ndarray, functional: Functional, k: int) -> float:
    if functional is Functional.MAXABS:
        return float(np.max(np.abs(partial)))
    if functional is Functional.RANGE:
        return float(np.max(partial) - np.min(partial))
    value = float(np.sum(partial ** 2) - np.sum(partial) ** 2 / k)
    return max(value, 0.0)


# ============================================
# ALL-k PROFILES
# ============================================

def constant_prefix_length(values: np.ndarray) -> int:
    """Length of the longest prefix equal to values[0]"""
    different = np.flatnonzero(values != values[0])
    return int(different[0]) if different.size else int(values.size)


def forward_profile(values: np.ndarray, k_values: np.ndarray, functional: Functional,
                    block_rows: Optional[int] = None) -> np.ndarray:
    """
    Forward functional of values for every k in k_values

    A block is evaluated up to its largest k. Extremes are masked at each
    row's own k and sums are read off running sums at column k, so every
    row's value is independent of how the rows are blocked.

    Args:
        values: 1-D float array
        k_values: integer array with entries in 1..n
        functional: CUSUM functional
        block_rows: rows per block (configuration default if None)

    Returns:
        Array of functional values aligned with k_values
    """
    values = np.asarray(values, dtype=float)
    k_values = np.asarray(k_values, dtype=np.int64)
    n = values.size
    block_rows = block_rows or get_config().block_rows

    # median is order-free, so a series and its reversal are shifted identically
    centered = values - np.median(values)
    cumulative = np.cumsum(centered)
    positions = np.arange(1, n + 1, dtype=float)

    out = np.empty(k_values.size, dtype=float)
    for start in range(0, k_values.size, block_rows):
        ks = k_values[start:start + block_rows]
        width = int(ks.max())
        means = cumulative[ks - 1] / ks
        partial = cumulative[None, :width] - positions[None, :width] * means[:, None]
        inside = positions[None, :width] <= ks[:, None]

        if functional is Functional.MAXABS:
            block = np.max(np.abs(partial), axis=1, where=inside, initial=0.0)
        elif functional is Functional.RANGE:
            block = (np.max(partial, axis=1, where=inside, initial=-np.inf)
                     - np.min(partial, axis=1, where=inside, initial=np.inf))
        else:
            rows = np.arange(ks.size)
            squares = np.cumsum(partial ** 2, axis=1)[rows, ks - 1]
            sums = np.cumsum(partial, axis=1)[rows, ks - 1]
            block = squares - sums ** 2 / ks
            if np.any(block < -1e-12 * np.maximum(squares, 1.0)):
                logger.warning("VARTYPE functional below rounding tolerance; clamping at 0")
            block = np.maximum(block, 0.0)
        out[start:start + block.size] = block

    out[k_values <= constant_prefix_length(values)] = 0.0
    return out


def _profiles(values: np.ndarray, delta: float, functional: Functional
              ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = values.size
    k_lo, k_hi = k_range(n, delta)
    k_values = np.arange(k_lo, k_hi + 1)
    forward = forward_profile(values, k_values, functional)
    backward = forward_profile(values[::-1], n - k_values, functional)
    return k_values, forward, backward


def build_curve(k_values: np.ndarray, numerators: np.ndarray, denominators: np.ndarray,
                orientation: Family = Family.V) -> RatioCurve:
    """
    Combine per-k numerators and denominators into a RatioCurve

    0/0 entries are undefined (NaN) and skipped; x/0 with x > 0 is +inf.
    Ties for the supremum go to the smallest k.

    Raises:
        AllDegenerate: If every entry is 0/0
    """
    ratios = np.full(k_values.size, np.nan)
    positive = denominators > 0
    ratios[positive] = numerators[positive] / denominators[positive]
    ratios[(denominators == 0) & (numerators > 0)] = np.inf

    if np.all(np.isnan(ratios)):
        raise AllDegenerate("Every candidate change point gives 0/0 (constant segments)")

    best = int(np.nanargmax(ratios))
    return RatioCurve(
        k_values=k_values,
        numerators=numerators,
        denominators=denominators,
        ratios=ratios,
        argmax_k=int(k_values[best]),
        sup_value=float(ratios[best]),
        orientation=orientation,
    )


# ============================================
# RATIO STATISTICS
# ============================================

def ratio_scan(x, delta: float, functional: Functional, orientation: Family = Family.V) -> RatioCurve:
    """
    Ratio curve over the trimmed range

    Args:
        x: Series or array of observations
        delta: Trim fraction
        functional: CUSUM functional
        orientation: Family.V (forward over backward) or Family.Z (backward over forward)

    Returns:
        RatioCurve

    Raises:
        EmptyRange: If the trimmed range is empty
        AllDegenerate: If every k gives 0/0
    """
    if orientation not in (Family.V, Family.Z):
        raise InvalidKind(f"Orientation must be V or Z, got {orientation}")
    values = Series.of(x).values
    k_values, forward, backward = _profiles(values, delta, functional)
    if orientation is Family.V:
        return build_curve(k_values, forward, backward, Family.V)
    return build_curve(k_values, backward, forward, Family.Z)


def statistic(x, delta: float, kind: StatKind) -> StatisticResult:
    """
    V, Z or TMAX statistic with its curve(s)

    TMAX returns both the V and the Z curve and takes the larger supremum.

    Raises:
        InvalidKind: For the classical family (see classical_statistic)
        AllDegenerate: If every k gives 0/0
    """
    if not kind.is_ratio:
        raise InvalidKind(f"{kind.label} is not a ratio statistic")
    values = Series.of(x).values
    k_values, forward, backward = _profiles(values, delta, kind.functional)

    if kind.family is Family.V:
        curves = (build_curve(k_values, forward, backward, Family.V),)
    elif kind.family is Family.Z:
        curves = (build_curve(k_values, backward, forward, Family.Z),)
    else:
        curves = (
            build_curve(k_values, forward, backward, Family.V),
            build_curve(k_values, backward, forward, Family.Z),
        )
    value = max(curve.sup_value for curve in curves)
    return StatisticResult(kind=kind, value=value, curves=curves)


# ============================================
# CLASSICAL STATISTICS
# ============================================

def default_bandwidth(n: int) -> int:
    """floor(n^(1/3)) computed in integers"""
    b = int(round(n ** (1.0 / 3.0)))
    while b ** 3 > n:
        b -= 1
    while (b + 1) ** 3 <= n:
        b += 1
    return b


def bartlett_lrv(x, bandwidth: Optional[int] = None) -> LongRunVariance:
    """
    Bartlett-kernel long-run variance

    sigma2 = g_0 + 2 * sum_{h=1..b} (1 - h/(b+1)) g_h with g_h the lag-h
    autocovariance (divisor n) of the demeaned series, truncated at 0.

    Args:
        x: Series or array
        bandwidth: Number of lags b (default floor(n^(1/3)))

    Raises:
        InvalidSpec: If bandwidth >= n
    """
    values = Series.of(x).values
    n = values.size
    if bandwidth is None:
        bandwidth = default_bandwidth(n)
    if not 0 <= bandwidth < n:
        raise InvalidSpec(f"Bandwidth must lie in 0..{n - 1}, got {bandwidth}")
    if constant_prefix_length(values) == n:
        return LongRunVariance(sigma2_hat=0.0, bandwidth=bandwidth)

    demeaned = values - values.mean()
    sigma2 = float(np.dot(demeaned, demeaned)) / n
    for h in range(1, bandwidth + 1):
        weight = 1.0 - h / (bandwidth + 1)
        sigma2 += 2.0 * weight * float(np.dot(demeaned[h:], demeaned[:-h])) / n
    return LongRunVariance(sigma2_hat=max(sigma2, 0.0), bandwidth=bandwidth)


def _full_cusum(values: np.ndarray) -> np.ndarray:
    return np.cumsum(values - values.mean())


def classical_statistic(x, functional: Functional, lrv: LongRunVariance) -> float:
    """
    Scaled CUSUM statistic T_1 (max), T_2 (range, R/S type) or T_3 (variance type)

    Raises:
        ZeroVariance: If the long-run variance estimate is 0
    """
    values = Series.of(x).values
    n = values.size
    if lrv.sigma2_hat <= 0:
        raise ZeroVariance("Long-run variance estimate is zero")
    partial = _full_cusum(values)
    if functional is Functional.MAXABS:
        return float(np.max(np.abs(partial)) / math.sqrt(n * lrv.sigma2_hat))
    if functional is Functional.RANGE:
        return float((np.max(partial) - np.min(partial)) / math.sqrt(n * lrv.sigma2_hat))
    spread = float(np.sum(partial ** 2) - np.sum(partial) ** 2 / n)
    return max(spread, 0.0) / (n ** 2 * lrv.sigma2_hat)


def classical_argmax(x) -> int:
    """Smallest k maximising |sum_{i<=k} (x_i - mean)|"""
    values = Series.of(x).values
    return int(np.argmax(np.abs(_full_cusum(values)))) + 1


# ============================================
# UNIFIED EVALUATION
# ============================================

def evaluate(x, kind: StatKind, delta: float, bandwidth: Optional[int] = None) -> Tuple[float, int]:
    """
    Value and change-point estimate for any of the twelve statistic kinds

    Returns:
        (value, argmax_k)
    """
    if kind.is_ratio:
        result = statistic(x, delta, kind)
        return result.value, result.argmax_k
    lrv = bartlett_lrv(x, bandwidth)
    return classical_statistic(x, kind.functional, lrv), classical_argmax(x)
