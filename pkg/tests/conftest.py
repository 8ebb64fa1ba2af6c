"""Shared fixtures for the ratiocusum test suite"""

import os

import numpy as np
import pytest

from ratiocusum.config import DEFAULT_GRID, DEFAULT_TABLE_REPS, reset_config
from ratiocusum.limit_mc import build_table
from ratiocusum.models import Family, Functional, StatKind
from ratiocusum.repository import CriticalTableRepository, save_critical_table

SMALL_GRID = 200
SMALL_REPS = 600


@pytest.fixture(autouse=True)
def isolated_config(monkeypatch, tmp_path):
    """Single worker, table directory under tmp_path, fresh config per test"""
    monkeypatch.setenv('RATIOCUSUM_WORKERS', '1')
    monkeypatch.setenv('RATIOCUSUM_TABLE_DIR', str(tmp_path / 'tables'))
    monkeypatch.delenv('RATIOCUSUM_BLOCK_ROWS', raising=False)
    monkeypatch.delenv('RATIOCUSUM_LOG_LEVEL', raising=False)
    reset_config()
    yield
    reset_config()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope='session')
def v1_table():
    """Coarse v1 table (delta 0.2) with its null sample"""
    kind = StatKind(Family.V, Functional.MAXABS)
    return build_table(kind, 0.2, m=SMALL_GRID, reps=SMALL_REPS, seed=11, workers=1)


@pytest.fixture(scope='session')
def t1_table():
    kind = StatKind(Family.T_CLASSICAL, Functional.MAXABS)
    return build_table(kind, 0.2, m=SMALL_GRID, reps=SMALL_REPS, seed=12, workers=1)


@pytest.fixture
def v1_table_file(tmp_path, v1_table):
    table, sample = v1_table
    return save_critical_table(table, tmp_path / 'v1.json', sample)


@pytest.fixture
def t1_table_file(tmp_path, t1_table):
    table, sample = t1_table
    return save_critical_table(table, tmp_path / 't1.json', sample)


@pytest.fixture(scope='session')
def slow_workers():
    """Process count for the full-scale Monte Carlo runs"""
    return os.cpu_count() or 1


@pytest.fixture(scope='session')
def acceptance_table(request, slow_workers):
    """Full-scale v1 table (grid 5000, 100000 draws), kept in the pytest cache between runs"""
    root = request.config.cache.mkdir('critical_tables')
    kind = StatKind(Family.V, Functional.MAXABS)
    table, _ = CriticalTableRepository(root).get_or_build(
        kind, 0.2, m=DEFAULT_GRID, reps=DEFAULT_TABLE_REPS, seed=2024, workers=slow_workers,
    )
    return table
