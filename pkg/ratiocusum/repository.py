#!/usr/bin/env python3
"""
Critical-Value Table Persistence

JSON codec for CriticalValueTable files (format version "1") and a
directory-backed repository keyed by table provenance.

Key Features:
- Lossless round-trip of quantiles and provenance (kind, delta, m, reps, seed, RNG)
- Optional null draws stored alongside, so p-values can be computed later
- Repository pattern: get / save / exists / list / get_or_build
"""

import json
import logging
import os
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np

from .config import DEFAULT_LEVELS, get_config
from .exceptions import CorruptTable, RatioCusumError, TableNotFound, VersionMismatch
from .limit_mc import build_table
from .models import CriticalValueTable, NullSample, StatKind

logger = logging.getLogger(__name__)

TABLE_FORMAT_VERSION = "1"

PathLike = Union[str, os.PathLike]

# ============================================
# JSON CODEC
# ============================================

def save_critical_table(table: CriticalValueTable, path: PathLike,
                        sample: Optional[NullSample] = None) -> Path:
    """
    Write a table (and optionally its null draws) as JSON

    Args:
        table: Table to persist
        path: Destination file
        sample: Null sample the table was built from

    Returns:
        Path written
    """
    data = table.to_dict()
    if sample is not None:
        if (sample.kind, sample.m, sample.reps, sample.seed) != (table.kind, table.m, table.reps, table.seed):
            raise CorruptTable("Null sample provenance does not match the table")
        data['draws'] = [float(v) for v in sample.draws]

    path = Path(path)
    if not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(data, handle, indent=2)
    logger.info(f"Saved critical values for {table.kind.label} to {path}")
    return path


def _read_table_json(path: PathLike) -> dict:
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise TableNotFound(f"No table at {path}")
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CorruptTable(f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise CorruptTable(f"{path} does not hold a table object")
    version = data.get('version')
    if version != TABLE_FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format version {version!r}, expected {TABLE_FORMAT_VERSION!r}")
    return data


def load_critical_table(path: PathLike) -> CriticalValueTable:
    """
    Read a table written by save_critical_table

    Raises:
        TableNotFound: If the file does not exist
        VersionMismatch: If the format version is not "1"
        CorruptTable: If the content is malformed or violates table invariants
    """
    return CriticalValueTable.from_dict(_read_table_json(path))


def load_table_with_sample(path: PathLike) -> Tuple[CriticalValueTable, Optional[NullSample]]:
    """
    Read a table together with its stored null draws (None when absent)

    Raises:
        CorruptTable: If stored draws are malformed
    """
    data = _read_table_json(path)
    table = CriticalValueTable.from_dict(data)
    if 'draws' not in data:
        return table, None
    try:
        sample = NullSample(kind=table.kind, delta=table.delta, m=table.m, reps=table.reps,
                            seed=table.seed, draws=np.asarray(data['draws'], dtype=float), rng=table.rng)
    except (RatioCusumError, TypeError, ValueError) as e:
        raise CorruptTable(f"{path}: stored null draws are invalid: {e}")
    return table, sample


# ============================================
# REPOSITORY PATTERN IMPLEMENTATION
# ============================================

class CriticalTableRepository:
    """
    Directory of critical-value tables, one JSON file per provenance

    File names encode kind, delta, grid, replications and seed.
    """

    def __init__(self, root: Optional[PathLike] = None):
        """
        Args:
            root: Directory holding the tables (RATIOCUSUM_TABLE_DIR if None)
        """
        self.root = Path(root if root is not None else get_config().table_dir)

    def path_for(self, kind: StatKind, delta: float, m: int, reps: int, seed: int) -> Path:
        return self.root / f"{kind.label}_delta{delta!r}_m{m}_reps{reps}_seed{seed}.json"

    def exists(self, kind: StatKind, delta: float, m: int, reps: int, seed: int) -> bool:
        return self.path_for(kind, delta, m, reps, seed).is_file()

    def get(self, kind: StatKind, delta: float, m: int, reps: int, seed: int
            ) -> Tuple[CriticalValueTable, Optional[NullSample]]:
        """
        Load a table by provenance

        Raises:
            TableNotFound: If no such table has been saved
        """
        path = self.path_for(kind, delta, m, reps, seed)
        if not path.is_file():
            raise TableNotFound(f"No table for {kind.label}, delta={delta}, m={m}, reps={reps}, seed={seed}")
        return load_table_with_sample(path)

    def save(self, table: CriticalValueTable, sample: Optional[NullSample] = None) -> Path:
        path = self.path_for(table.kind, table.delta, table.m, table.reps, table.seed)
        return save_critical_table(table, path, sample)

    def list_tables(self) -> List[CriticalValueTable]:
        """All readable tables in the repository; unreadable files are skipped with a warning"""
        tables = []
        if not self.root.is_dir():
            return tables
        for path in sorted(self.root.glob('*.json')):
            try:
                tables.append(load_critical_table(path))
            except RatioCusumError as e:
                logger.warning(f"Skipping {path}: {e}")
        return tables

    def get_or_build(self, kind: StatKind, delta: float, m: int, reps: int, seed: int,
                     levels: Iterable[float] = DEFAULT_LEVELS, workers: Optional[int] = None
                     ) -> Tuple[CriticalValueTable, Optional[NullSample]]:
        """Load the table with this provenance, simulating and saving it first if missing"""
        if self.exists(kind, delta, m, reps, seed):
            logger.debug(f"Using stored table for {kind.label}")
            return self.get(kind, delta, m, reps, seed)

        table, sample = build_table(kind, delta, m=m, reps=reps, seed=seed, levels=levels, workers=workers)
        self.save(table, sample)
        return table, sample


def get_table_repository(root: Optional[PathLike] = None) -> CriticalTableRepository:
    """Repository at root (configured directory if None)"""
    return CriticalTableRepository(root)
