#!/usr/bin/env python3
"""
Size and Power Experiments

Runs replicated change-point tests on simulated data and compares the
rejection rates with persisted critical values. Also reproduces the
published size/power grids and tracks the growth of statistics under
alternatives.

Key Features:
- Replication r of cell c draws from stream(master_seed, c, r)
- Process pool over replication chunks; counts are order-free
- Results as dataclasses, convertible to pandas frames for CSV/JSON output
"""

import logging
import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .config import DEFAULT_DELTA, get_config
from .cusum_core import evaluate
from .datagen import generate
from .exceptions import AllDegenerate, InvalidSpec
from .models import (
    ChangeSpec,
    CriticalValueTable,
    ExperimentConfig,
    Family,
    Functional,
    GeneratorSpec,
    Regime,
    RejectionReport,
    StatKind,
)
from .reference_tables import LEVELS, N_VALUES, TableLayout, get_layout
from .streams import check_seed, stream

logger = logging.getLogger(__name__)

REFERENCE_KIND = StatKind(Family.V, Functional.MAXABS)
REFERENCE_DELTA = 0.2

# which alternatives each family is designed to detect
_DIVERGING = {
    Family.V: {Regime.MEAN_SHIFT, Regime.RW_TO_STAT},
    Family.Z: {Regime.STAT_TO_RW},
    Family.TMAX: {Regime.MEAN_SHIFT, Regime.STAT_TO_RW, Regime.RW_TO_STAT},
    Family.T_CLASSICAL: {Regime.MEAN_SHIFT},
}

# ============================================
# REPLICATION WORKERS
# ============================================

def _statistic_values(cfg: ExperimentConfig, start: int, stop: int) -> List[float]:
    values = []
    for r in range(start, stop):
        rng = stream(cfg.master_seed, cfg.cell_index, r)
        x = generate(cfg.n, cfg.generator, cfg.change, rng)
        try:
            value, _ = evaluate(x, cfg.kind, cfg.delta)
        except AllDegenerate:
            logger.error(f"Degenerate replication {r} in cell {cfg.cell_index}")
            raise
        values.append(value)
    return values


def _chunk_job(job: Tuple[ExperimentConfig, int, int]) -> List[float]:
    cfg, start, stop = job
    return _statistic_values(cfg, start, stop)


def simulate_statistics(cfg: ExperimentConfig, workers: Optional[int] = None) -> np.ndarray:
    """
    Statistic values of every replication, in replication order

    Raises:
        AllDegenerate: If a replication has no defined ratio
    """
    workers = workers or get_config().workers
    size = max(1, math.ceil(cfg.reps / (workers * 4)))
    jobs = [(cfg, start, min(cfg.reps, start + size)) for start in range(0, cfg.reps, size)]

    if workers > 1 and len(jobs) > 1:
        with Pool(processes=workers) as pool:
            parts = pool.map(_chunk_job, jobs)
    else:
        parts = [_chunk_job(job) for job in jobs]
    return np.array([value for part in parts for value in part], dtype=float)


# ============================================
# EXPERIMENTS
# ============================================

def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> RejectionReport:
    """
    Rejection rates of one design

    A replication rejects at a level when its statistic is at least the
    level's critical value; +inf statistics always reject.

    Args:
        cfg: Experiment configuration
        workers: Process count (configuration default if None)

    Returns:
        RejectionReport with rates and standard errors per level
    """
    logger.debug(f"Running cell {cfg.cell_index}: n={cfg.n}, reps={cfg.reps}, "
                 f"model={cfg.generator.variant.value}, change={cfg.change.regime.value}")
    values = simulate_statistics(cfg, workers)
    counts = {level: int(np.sum(values >= cfg.critical_values.value_at(level))) for level in cfg.levels}
    n_infinite = int(np.sum(np.isinf(values)))
    if n_infinite:
        logger.warning(f"{n_infinite} of {cfg.reps} replications gave an infinite statistic")
    return RejectionReport.from_counts(counts, cfg.reps, cfg.digest(), n_infinite)


def make_config(n: int, reps: int, generator: GeneratorSpec, change: ChangeSpec,
                critical_values: CriticalValueTable, master_seed: int,
                kind: Optional[StatKind] = None, delta: Optional[float] = None,
                levels: Optional[Iterable[float]] = None, cell_index: int = 0) -> ExperimentConfig:
    """ExperimentConfig with kind, delta and levels taken from the table when omitted"""
    return ExperimentConfig(
        n=n,
        reps=reps,
        levels=tuple(levels if levels is not None else critical_values.levels),
        generator=generator,
        change=change,
        kind=kind or critical_values.kind,
        delta=delta if delta is not None else critical_values.delta,
        critical_values=critical_values,
        master_seed=master_seed,
        cell_index=cell_index,
    )


# ============================================
# PUBLISHED GRIDS
# ============================================

@dataclass(frozen=True)
class ReproducedCell:
    table_id: str
    n: int
    level: float
    column: float
    delta_mag: float
    rate: float
    std_error: float
    reference: float
    anomalous: bool
    digest: str

    @property
    def difference(self) -> float:
        return self.rate - self.reference


def _layout_designs(layout: TableLayout) -> List[Tuple[int, float, GeneratorSpec, ChangeSpec]]:
    designs = []
    for n in N_VALUES:
        for column in layout.columns:
            if layout.model == 'ar1':
                generator = GeneratorSpec.ar1(column)
                delta_mag = layout.delta_mags[0]
            else:
                generator = GeneratorSpec.garch11(*layout.garch)
                delta_mag = column
            regime = Regime.MEAN_SHIFT if delta_mag else Regime.NONE
            change = ChangeSpec(regime=regime, theta=layout.kstar_fraction, delta_mag=delta_mag)
            designs.append((n, column, generator, change))
    return designs


def reproduce_table(table_id: str, reps: int, seed: int, critical_values: CriticalValueTable,
                    workers: Optional[int] = None) -> List[ReproducedCell]:
    """
    Simulate every cell of a published grid

    Uses V with MAXABS and trim fraction 0.2; each (n, column) design is one
    experiment evaluated at the three published levels.

    Raises:
        InvalidSpec: If seed is negative
        KindMismatch: If critical_values is not for (v1, 0.2) or lacks a level
    """
    seed = check_seed(seed)
    layout = get_layout(table_id)
    critical_values.check_matches(REFERENCE_KIND, REFERENCE_DELTA)
    for level in LEVELS:
        critical_values.value_at(level)

    designs = _layout_designs(layout)
    logger.info(f"Reproducing {layout.table_id} ({layout.title}): {len(designs)} designs x "
                f"{len(LEVELS)} levels, {reps} replications each")

    cells = []
    for cell_index, (n, column, generator, change) in enumerate(designs):
        cfg = make_config(n, reps, generator, change, critical_values, seed,
                          kind=REFERENCE_KIND, delta=REFERENCE_DELTA, levels=LEVELS,
                          cell_index=cell_index)
        report = run_experiment(cfg, workers)
        for level in LEVELS:
            key = (n, level, column)
            cells.append(ReproducedCell(
                table_id=layout.table_id,
                n=n,
                level=level,
                column=column,
                delta_mag=change.delta_mag,
                rate=report.rates[level],
                std_error=report.std_errors[level],
                reference=layout.values[key],
                anomalous=key in layout.anomalies,
                digest=report.digest,
            ))
    cells.sort(key=lambda c: (c.n, -c.level, c.column))
    return cells


def cells_to_frame(cells: Sequence[ReproducedCell]) -> pd.DataFrame:
    """Long-format frame of reproduced cells with the printed values alongside"""
    frame = pd.DataFrame([
        {
            'table': c.table_id, 'n': c.n, 'level': c.level, 'column': c.column,
            'delta_mag': c.delta_mag, 'rate': c.rate, 'std_error': c.std_error,
            'reference': c.reference, 'difference': c.difference, 'anomalous': c.anomalous,
            'digest': c.digest,
        }
        for c in cells
    ])
    return frame


# ============================================
# DIVERGENCE UNDER ALTERNATIVES
# ============================================

def divergence_trend(kind: StatKind, alternative: Regime, n_grid: Sequence[int], reps: int,
                     seed: int, delta: float = DEFAULT_DELTA, theta: float = 0.5,
                     delta_mag: float = 1.0, generator: Optional[GeneratorSpec] = None
                     ) -> Dict[int, float]:
    """
    Median statistic over reps replications for each sample size

    Args:
        kind: Statistic kind
        alternative: Regime the statistic family is designed to detect
        n_grid: Sample sizes
        reps: Replications per sample size
        seed: Master seed (sample size index i, replication r -> stream(seed, i, r))
        delta: Trim fraction
        theta: Change fraction, delta < theta < 1 - delta
        delta_mag: Shift size for MEAN_SHIFT
        generator: Error model (iid standard normal by default)

    Returns:
        Mapping n -> median statistic

    Raises:
        InvalidSpec: If the alternative does not suit the family, theta is outside
            (delta, 1-delta) or seed is negative
    """
    seed = check_seed(seed)
    if alternative not in _DIVERGING[kind.family]:
        raise InvalidSpec(f"{kind.label} is not designed to detect {alternative.value}")
    if not delta < theta < 1 - delta:
        raise InvalidSpec(f"Need delta < theta < 1 - delta, got theta={theta}, delta={delta}")

    generator = generator or GeneratorSpec.iid()
    change = ChangeSpec(regime=alternative, theta=theta,
                        delta_mag=delta_mag if alternative is Regime.MEAN_SHIFT else 0.0)
    medians = {}
    for index, n in enumerate(n_grid):
        values = [
            evaluate(generate(n, generator, change, stream(seed, index, r)), kind, delta)[0]
            for r in range(reps)
        ]
        medians[int(n)] = float(np.median(values))
        logger.debug(f"{kind.label} under {alternative.value}, n={n}: median {medians[int(n)]:.4f}")
    return medians
