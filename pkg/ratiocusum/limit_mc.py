#!/usr/bin/env python3
"""
Monte Carlo Engine for the Limiting Distributions

Simulates Wiener paths on a uniform grid, evaluates the bridge-like
processes of the forward segment [0, t] and of the backward segment [t, 1],
and turns replicated sup-ratios into null samples, critical values and
p-values. The classical statistics get their limits from Brownian-bridge
functionals on the same engine.

Key Features:
- Per-replication streams derived from (seed, replication), order-free
- Optional process pool (RATIOCUSUM_WORKERS) with bitwise-identical output
- Fixed-t Brownian-bridge draws for cross-validating the ratio laws
"""

import logging
import math
from multiprocessing import Pool
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .config import DEFAULT_CROSSCHECK_REPS, DEFAULT_GRID, DEFAULT_LEVELS, RNG_NAME, get_config
from .cusum_core import build_curve, forward_profile, k_range
from .exceptions import InvalidKind, InvalidSpec
from .models import (
    CriticalValueTable,
    EtaPair,
    Family,
    Functional,
    NullSample,
    StatKind,
    WienerPath,
    trim_fraction,
)
from .streams import check_seed, stream

logger = logging.getLogger(__name__)

# ============================================
# PATHS AND BRIDGE-LIKE PROCESSES
# ============================================

def wiener_path(m: int, rng: np.random.Generator) -> WienerPath:
    """
    Wiener process at t = j/m, j = 0..m

    Increments are independent N(0, 1/m) draws from rng.
    """
    if m < 2:
        raise InvalidSpec(f"Grid resolution must be >= 2, got {m}")
    steps = rng.standard_normal(m) / math.sqrt(m)
    return WienerPath(m=m, w=np.concatenate(([0.0], np.cumsum(steps))))


def _segment_functional(process: np.ndarray, functional: Functional, m: int, length: float) -> float:
    """
    Functional of a pinned process sampled on grid points

    process holds the values at the grid points of the segment, endpoints
    included; integrals are left-endpoint Riemann sums with step 1/m.
    """
    if functional is Functional.MAXABS:
        return float(np.max(np.abs(process)))
    if functional is Functional.RANGE:
        return float(np.max(process) - np.min(process))
    left = process[:-1]
    integral_sq = float(np.sum(left ** 2)) / m
    integral = float(np.sum(left)) / m
    return max(integral_sq - integral ** 2 / length, 0.0)


def eta_at(path: WienerPath, t_index: int, functional: Functional) -> EtaPair:
    """
    Forward and backward bridge functionals at t = t_index/m

    eta_num uses W(s) - (s/t) W(t) on [0, t]; eta_den uses
    W*(s) - ((1-s)/(1-t)) W*(t) on [t, 1] with W*(s) = W(1) - W(s).

    Raises:
        InvalidSpec: If t_index is outside 1..m-1
    """
    m = path.m
    k = int(t_index)
    if not 1 <= k <= m - 1:
        raise InvalidSpec(f"t_index must lie in 1..{m - 1}, got {t_index}")
    w = path.w
    t = k / m

    b = np.arange(0, k + 1)
    forward = w[:k + 1] - (b / k) * w[k]

    tail = w[m] - w[k:]
    b = np.arange(k, m + 1)
    backward = tail - ((m - b) / (m - k)) * tail[0]

    return EtaPair(
        t=t,
        eta_num=_segment_functional(forward, functional, m, t),
        eta_den=_segment_functional(backward, functional, m, 1.0 - t),
        functional=functional,
    )


# ============================================
# SUP-RATIO DRAWS
# ============================================

def _grid_profiles(path: WienerPath, delta: float, functional: Functional
                   ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # grid functionals equal the CUSUM functionals of the increments
    # (VARTYPE up to the common factor 1/m, which cancels in ratios)
    increments = path.increments
    m = path.m
    k_lo, k_hi = k_range(m, delta)
    k_values = np.arange(k_lo, k_hi + 1)
    forward = forward_profile(increments, k_values, functional)
    backward = forward_profile(increments[::-1], m - k_values, functional)
    return k_values, forward, backward


def sup_ratio_draw(path: WienerPath, delta: float, functional: Functional,
                   orientation: Family = Family.V) -> float:
    """
    Supremum over the t-grid in [delta, 1-delta] of the eta ratio

    V takes eta_num/eta_den, Z takes eta_den/eta_num, TMAX the larger of
    the two suprema. 0/0 grid points are skipped.
    """
    if orientation not in (Family.V, Family.Z, Family.TMAX):
        raise InvalidKind(f"Orientation must be V, Z or TMAX, got {orientation}")
    k_values, forward, backward = _grid_profiles(path, trim_fraction(delta), functional)
    if orientation is Family.V:
        return build_curve(k_values, forward, backward).sup_value
    if orientation is Family.Z:
        return build_curve(k_values, backward, forward, Family.Z).sup_value
    return max(
        build_curve(k_values, forward, backward).sup_value,
        build_curve(k_values, backward, forward, Family.Z).sup_value,
    )


# ============================================
# BROWNIAN BRIDGE FUNCTIONALS
# ============================================

def brownian_bridge(m: int, rng: np.random.Generator) -> np.ndarray:
    """Brownian bridge B(u) = W(u) - u W(1) at u = j/m, j = 0..m"""
    w = wiener_path(m, rng).w
    return w - (np.arange(m + 1) / m) * w[m]


def bridge_functional(bridge: np.ndarray, functional: Functional) -> float:
    """
    sup|B|, sup B - inf B, or int B^2 - (int B)^2 on [0, 1]

    These are also the null limits of the classical scaled statistics.
    """
    m = bridge.size - 1
    return _segment_functional(bridge, functional, m, 1.0)


def _ratio_scale(t: float, functional: Functional) -> float:
    if functional is Functional.VARTYPE:
        return t / (1.0 - t)
    return math.sqrt(t / (1.0 - t))


def bridge_ratio_draw(t: float, functional: Functional, rng: np.random.Generator,
                      m: int = DEFAULT_GRID) -> float:
    """
    Fixed-t ratio from two independent Brownian bridges

    Returns scale(t) * F(B1) / F(B2) with scale sqrt(t/(1-t)) for
    MAXABS/RANGE and t/(1-t) for VARTYPE.
    """
    if not 0.0 < t < 1.0:
        raise InvalidSpec(f"t must lie in (0, 1), got {t}")
    first = bridge_functional(brownian_bridge(m, rng), functional)
    second = bridge_functional(brownian_bridge(m, rng), functional)
    return _ratio_scale(t, functional) * first / second


def eta_ratio_draw(t: float, functional: Functional, rng: np.random.Generator,
                   m: int = DEFAULT_GRID) -> float:
    """eta_num/eta_den at the grid point nearest t on a fresh Wiener path"""
    path = wiener_path(m, rng)
    pair = eta_at(path, int(round(t * m)), functional)
    return pair.eta_num / pair.eta_den


def fixed_t_samples(t: float, functional: Functional, reps: int = DEFAULT_CROSSCHECK_REPS,
                    m: int = DEFAULT_GRID, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Paired samples for cross-checking the ratio law at a fixed t

    Eta-ratio draw r uses stream(seed, 0, r) and bridge-ratio draw r uses
    stream(seed, 1, r); the two samples share the same limit law.

    Returns:
        (eta_ratios, bridge_ratios)
    """
    seed = check_seed(seed)
    if reps < 1:
        raise InvalidSpec(f"Replications must be >= 1, got {reps}")
    eta = np.array([eta_ratio_draw(t, functional, stream(seed, 0, r), m=m) for r in range(reps)])
    bridge = np.array([bridge_ratio_draw(t, functional, stream(seed, 1, r), m=m) for r in range(reps)])
    return eta, bridge


# ============================================
# NULL SAMPLES
# ============================================

def _single_draw(kind: StatKind, delta: float, m: int, rng: np.random.Generator) -> float:
    if kind.family is Family.T_CLASSICAL:
        return bridge_functional(brownian_bridge(m, rng), kind.functional)
    return sup_ratio_draw(wiener_path(m, rng), delta, kind.functional, kind.family)


def _draw_chunk(job: Tuple[str, float, int, int, int, int]) -> List[float]:
    label, delta, m, seed, start, stop = job
    kind = StatKind.parse(label)
    return [_single_draw(kind, delta, m, stream(seed, r)) for r in range(start, stop)]


def _chunks(reps: int, workers: int) -> Iterable[Tuple[int, int]]:
    size = max(1, math.ceil(reps / (workers * 4)))
    for start in range(0, reps, size):
        yield start, min(reps, start + size)


def null_sample(kind: StatKind, delta: float, m: int = DEFAULT_GRID, reps: int = 100000,
                seed: int = 0, workers: Optional[int] = None) -> NullSample:
    """
    Sorted Monte Carlo draws of the limiting statistic under no change

    Replication r draws from stream(seed, r); the result is a function of
    (kind, delta, m, reps, seed) only.

    Args:
        kind: Statistic kind (ratio families use sup-ratios over [delta, 1-delta];
            the classical family uses Brownian-bridge functionals)
        delta: Trim fraction
        m: Grid resolution
        reps: Number of replications
        seed: Master seed
        workers: Process count (configuration default if None)

    Returns:
        NullSample
    """
    delta = trim_fraction(delta)
    seed = check_seed(seed)
    if reps < 1:
        raise InvalidSpec(f"Replications must be >= 1, got {reps}")
    if m < 2:
        raise InvalidSpec(f"Grid resolution must be >= 2, got {m}")
    if kind.is_ratio:
        k_range(m, delta)
    if reps < 1000:
        logger.debug(f"Null sample with only {reps} replications; quantiles will be rough")

    workers = workers or get_config().workers
    jobs = [(kind.label, delta, m, seed, start, stop) for start, stop in _chunks(reps, workers)]
    logger.info(f"Simulating {reps} null draws for {kind.label} (delta={delta}, m={m}, "
                f"seed={seed}, workers={workers})")

    if workers > 1:
        with Pool(processes=workers) as pool:
            parts = pool.map(_draw_chunk, jobs)
    else:
        parts = [_draw_chunk(job) for job in jobs]

    draws = np.array([value for part in parts for value in part], dtype=float)
    return NullSample(kind=kind, delta=delta, m=m, reps=reps, seed=seed, draws=draws, rng=RNG_NAME)


# ============================================
# CRITICAL VALUES AND P-VALUES
# ============================================

def critical_value(sample: NullSample, level: float) -> float:
    """
    Empirical (1-level)-quantile: order statistic ceil((1-level)*reps), 1-based
    """
    if not 0.0 < level < 1.0:
        raise InvalidSpec(f"Level must lie in (0, 1), got {level}")
    rank = math.ceil((1.0 - level) * sample.reps - 1e-9)
    rank = min(max(rank, 1), sample.reps)
    return float(sample.draws[rank - 1])


def p_value(sample: NullSample, observed: float) -> float:
    """(1 + #{draws >= observed}) / (reps + 1)"""
    exceed = sample.reps - int(np.searchsorted(sample.draws, observed, side='left'))
    return (1 + exceed) / (sample.reps + 1)


def build_table(kind: StatKind, delta: float, m: int = DEFAULT_GRID, reps: int = 100000,
                seed: int = 0, levels: Iterable[float] = DEFAULT_LEVELS,
                workers: Optional[int] = None) -> Tuple[CriticalValueTable, NullSample]:
    """
    Null sample plus its critical values per level

    Returns:
        (table, sample)

    Raises:
        CorruptTable: If the sample is too small to separate the levels
    """
    sample = null_sample(kind, delta, m=m, reps=reps, seed=seed, workers=workers)
    quantiles: Dict[float, float] = {float(level): critical_value(sample, level) for level in levels}
    table = CriticalValueTable(
        kind=kind, delta=sample.delta, m=m, reps=reps, seed=seed, quantiles=quantiles, rng=sample.rng,
    )
    logger.info(f"Critical values for {kind.label}: "
                + ", ".join(f"{level}: {value:.4f}" for level, value in sorted(quantiles.items())))
    return table, sample
