"""Tests for the size/power harness and the published grids"""

import itertools
import math

import numpy as np
import pytest

from ratiocusum.config import DEFAULT_EXPERIMENT_REPS
from ratiocusum.exceptions import InvalidKind, InvalidSpec, KindMismatch
from ratiocusum.experiments import (
    cells_to_frame,
    divergence_trend,
    make_config,
    reproduce_table,
    run_experiment,
    simulate_statistics,
)
from ratiocusum.models import ChangeSpec, Family, Functional, GeneratorSpec, Regime, StatKind
from ratiocusum.reference_tables import LEVELS, N_VALUES, RHOS, TABLES, get_layout

V1 = StatKind(Family.V, Functional.MAXABS)


# ============================================
# SINGLE EXPERIMENTS
# ============================================

def test_zero_shift_matches_no_change(v1_table):
    table, _ = v1_table
    generator = GeneratorSpec.ar1(0.3)
    none = make_config(120, 40, generator, ChangeSpec(), table, master_seed=3)
    zero = make_config(120, 40, generator, ChangeSpec(Regime.MEAN_SHIFT, 0.5, 0.0), table, master_seed=3)
    np.testing.assert_array_equal(simulate_statistics(none, workers=1), simulate_statistics(zero, workers=1))
    assert run_experiment(none, workers=1).rates == run_experiment(zero, workers=1).rates


def test_report_rates_and_standard_errors(v1_table):
    table, _ = v1_table
    cfg = make_config(100, 50, GeneratorSpec.iid(), ChangeSpec(Regime.MEAN_SHIFT, 0.5, 2.0), table, 1)
    report = run_experiment(cfg, workers=1)
    values = simulate_statistics(cfg, workers=1)
    assert report.reps == 50
    assert report.digest == cfg.digest()
    for level in table.levels:
        expected = np.mean(values >= table.value_at(level))
        assert report.rates[level] == pytest.approx(expected)
        p = report.rates[level]
        assert report.std_errors[level] == pytest.approx(math.sqrt(p * (1 - p) / 50))
    # a 2-sigma shift at n = 100 is detected almost always
    assert report.rates[0.10] > 0.9


def test_experiment_is_deterministic_across_workers(v1_table):
    table, _ = v1_table
    cfg = make_config(80, 30, GeneratorSpec.garch11(1.0, 0.1, 0.1), ChangeSpec(), table, 5, cell_index=2)
    single = simulate_statistics(cfg, workers=1)
    pooled = simulate_statistics(cfg, workers=2)
    np.testing.assert_array_equal(single, pooled)


def test_config_must_match_table(v1_table):
    table, _ = v1_table
    with pytest.raises(KindMismatch):
        make_config(100, 10, GeneratorSpec.iid(), ChangeSpec(), table, 0, kind=StatKind.parse('z1'))
    with pytest.raises(KindMismatch):
        make_config(100, 10, GeneratorSpec.iid(), ChangeSpec(), table, 0, delta=0.1)
    with pytest.raises(InvalidSpec):
        make_config(100, 10, GeneratorSpec.iid(), ChangeSpec(), table, 0, levels=[0.2])
    with pytest.raises(InvalidSpec):
        make_config(100, 0, GeneratorSpec.iid(), ChangeSpec(), table, 0)
    with pytest.raises(InvalidSpec):
        make_config(100, 10, GeneratorSpec.iid(), ChangeSpec(), table, -1)


def test_classical_statistic_in_experiments(t1_table):
    table, _ = t1_table
    cfg = make_config(150, 40, GeneratorSpec.iid(), ChangeSpec(Regime.MEAN_SHIFT, 0.5, 1.5), table, 7)
    report = run_experiment(cfg, workers=1)
    assert report.rates[0.10] > 0.8


# ============================================
# PUBLISHED GRIDS
# ============================================

def test_every_grid_is_complete():
    assert sorted(TABLES) == [f"T{i}" for i in range(1, 10)]
    for layout in TABLES.values():
        n_rows, n_levels, n_columns = layout.shape
        assert len(layout.values) == n_rows * n_levels * n_columns
        assert all(0.0 <= v <= 1.0 or key in layout.anomalies for key, v in layout.values.items())


def test_grid_lookup():
    layout = get_layout('t8')
    assert layout.garch == (1.0, 0.1, 0.1)
    assert layout.reference(200, 0.05, 1.0) == 0.962
    assert (500, 0.05, 0.5) in layout.anomalies
    with pytest.raises(InvalidKind):
        get_layout('T10')


def test_reproduce_table_layout(v1_table):
    table, _ = v1_table
    cells = reproduce_table('T1', reps=2, seed=1, critical_values=table, workers=1)
    assert len(cells) == 81
    assert {(c.n, c.level, c.column) for c in cells} == set(itertools.product(N_VALUES, LEVELS, RHOS))
    assert all(c.rate in (0.0, 0.5, 1.0) for c in cells)
    first = next(c for c in cells if (c.n, c.level, c.column) == (500, 0.05, 0.1))
    assert first.reference == 0.061
    assert not first.anomalous
    assert next(c for c in cells if (c.n, c.level, c.column) == (200, 0.10, 0.9)).anomalous

    frame = cells_to_frame(cells)
    assert frame.shape[0] == 81
    assert {'rate', 'reference', 'difference', 'anomalous', 'digest'} <= set(frame.columns)


def test_reproduce_table_is_deterministic(v1_table):
    table, _ = v1_table
    first = reproduce_table('T8', reps=3, seed=4, critical_values=table, workers=1)
    second = reproduce_table('T8', reps=3, seed=4, critical_values=table, workers=2)
    assert first == second
    assert len(first) == 36


def test_reproduce_table_requires_reference_kind(t1_table):
    table, _ = t1_table
    with pytest.raises(KindMismatch):
        reproduce_table('T1', reps=2, seed=0, critical_values=table)


# ============================================
# DIVERGENCE UNDER ALTERNATIVES
# ============================================

def test_divergence_rejects_unsuitable_alternative():
    with pytest.raises(InvalidSpec):
        divergence_trend(V1, Regime.STAT_TO_RW, [50], reps=2, seed=0)
    with pytest.raises(InvalidSpec):
        divergence_trend(V1, Regime.MEAN_SHIFT, [50], reps=2, seed=0, theta=0.1)


@pytest.mark.slow
@pytest.mark.parametrize('family, alternative', [
    (Family.V, Regime.MEAN_SHIFT),
    (Family.Z, Regime.STAT_TO_RW),
    (Family.V, Regime.RW_TO_STAT),
    (Family.TMAX, Regime.STAT_TO_RW),
    (Family.TMAX, Regime.RW_TO_STAT),
])
def test_statistics_diverge_under_alternatives(family, alternative):
    medians = divergence_trend(StatKind(family, Functional.MAXABS), alternative, [100, 400, 1600],
                               reps=500, seed=19)
    assert medians[100] < medians[400] < medians[1600]


# ============================================
# REPRODUCING PRINTED VALUES
# ============================================

@pytest.fixture
def rate(acceptance_table, slow_workers):
    def _rate(n, generator, change, seed, level=0.05):
        cfg = make_config(n, DEFAULT_EXPERIMENT_REPS, generator, change, acceptance_table, seed)
        return run_experiment(cfg, workers=slow_workers).rates[level]
    return _rate


def _within_two_joint_se(lower, higher):
    joint_se = math.sqrt((lower * (1 - lower) + higher * (1 - higher)) / DEFAULT_EXPERIMENT_REPS)
    return higher >= lower - 2 * joint_se


@pytest.mark.slow
@pytest.mark.parametrize('n, level, rho', list(itertools.product((500, 1000), (0.10, 0.05), (0.1, 0.5))))
def test_size_close_to_printed_values(rate, n, level, rho):
    observed = rate(n, GeneratorSpec.ar1(rho), ChangeSpec(), 31, level=level)
    assert observed == pytest.approx(get_layout('T1').reference(n, level, rho), abs=0.03)


@pytest.mark.slow
@pytest.mark.parametrize('rho', [0.1, 0.5])
def test_power_close_to_printed_values(rate, rho):
    change = ChangeSpec(Regime.MEAN_SHIFT, 0.5, 1.0)
    observed = rate(500, GeneratorSpec.ar1(rho), change, 32)
    assert observed == pytest.approx(get_layout('T3').reference(500, 0.05, rho), abs=0.03)


@pytest.mark.slow
def test_power_increases_with_shift_size(rate):
    rates = [
        rate(500, GeneratorSpec.ar1(0.3), ChangeSpec(Regime.MEAN_SHIFT, 0.5, delta_mag), 33)
        for delta_mag in (0.5, 1.0, 1.5)
    ]
    for lower, higher in zip(rates, rates[1:]):
        assert _within_two_joint_se(lower, higher)


@pytest.mark.slow
@pytest.mark.parametrize('n, rho', list(itertools.product((200, 500), (0.1, 0.5))))
def test_size_below_power(rate, n, rho):
    size = rate(n, GeneratorSpec.ar1(rho), ChangeSpec(), 35)
    power = rate(n, GeneratorSpec.ar1(rho), ChangeSpec(Regime.MEAN_SHIFT, 0.5, 0.5), 35)
    assert _within_two_joint_se(size, power)


@pytest.mark.slow
@pytest.mark.parametrize('rho', [0.1, 0.5])
def test_power_increases_with_sample_size(rate, rho):
    change = ChangeSpec(Regime.MEAN_SHIFT, 0.5, 0.5)
    rates = [rate(n, GeneratorSpec.ar1(rho), change, 36) for n in N_VALUES]
    for lower, higher in zip(rates, rates[1:]):
        assert _within_two_joint_se(lower, higher)


@pytest.mark.slow
@pytest.mark.parametrize('rho', [0.1, 0.5])
def test_power_insensitive_to_change_location(rate, rho):
    middle = rate(500, GeneratorSpec.ar1(rho), ChangeSpec(Regime.MEAN_SHIFT, 0.5, 1.0), 37)
    quarter = rate(500, GeneratorSpec.ar1(rho), ChangeSpec(Regime.MEAN_SHIFT, 0.25, 1.0), 37)
    assert abs(middle - quarter) < 0.08


@pytest.mark.slow
@pytest.mark.parametrize('delta_mag', [0.0, 1.0, 1.5])
def test_garch_cells_close_to_printed_values(rate, delta_mag):
    regime = Regime.MEAN_SHIFT if delta_mag else Regime.NONE
    observed = rate(200, GeneratorSpec.garch11(1.0, 0.1, 0.1), ChangeSpec(regime, 0.5, delta_mag), 34)
    assert observed == pytest.approx(get_layout('T8').reference(200, 0.05, delta_mag), abs=0.03)
