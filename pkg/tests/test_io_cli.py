"""Tests for series files, table files, detection and the command line"""

import json
import math

import numpy as np
import pandas as pd
import pytest

from ratiocusum.cusum_core import bartlett_lrv, classical_statistic, statistic
from ratiocusum.exceptions import CorruptTable, KindMismatch, ParseError, TableNotFound, TooShort, VersionMismatch
from ratiocusum.io_cli import cli_main, detect, load_critical_table, load_series, save_critical_table, write_series
from ratiocusum.models import Functional, Series, StatKind
from ratiocusum.repository import load_table_with_sample


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


# ============================================
# SERIES FILES
# ============================================

def test_load_plain_values(tmp_path):
    series = load_series(_write(tmp_path, 'a.csv', "1\n2\n3\n"))
    np.testing.assert_array_equal(series.values, [1.0, 2.0, 3.0])


def test_load_skips_header_comments_and_blanks(tmp_path):
    series = load_series(_write(tmp_path, 'b.csv', "# generated\n\nvalue\n1\n\n2\n"))
    np.testing.assert_array_equal(series.values, [1.0, 2.0])


@pytest.mark.parametrize('text, line', [
    ("1\nx\n", 2),
    ("value\nname\n1\n2\n", 2),
    ("# c\n\nvalue\n1\nnan\n", 5),
    ("1\n2\ninf\n", 3),
])
def test_load_reports_bad_line(tmp_path, text, line):
    with pytest.raises(ParseError) as excinfo:
        load_series(_write(tmp_path, 'bad.csv', text))
    assert excinfo.value.line == line


def test_load_rejects_bytes_that_are_not_utf8(tmp_path):
    path = tmp_path / 'latin.csv'
    path.write_bytes(b"value\n1\n\xff\xfe\n2\n")
    with pytest.raises(ParseError) as excinfo:
        load_series(path)
    assert excinfo.value.line == 3


def test_load_too_short(tmp_path):
    with pytest.raises(TooShort):
        load_series(_write(tmp_path, 'short.csv', "value\n1\n"))


def test_written_series_reads_back_exactly(tmp_path, rng):
    series = Series(rng.normal(size=50) * 1e3)
    path = write_series(series, tmp_path / 'out' / 's.csv', ['model: iid'])
    assert path.read_text().startswith('# model: iid\nvalue\n')
    np.testing.assert_array_equal(load_series(path).values, series.values)


# ============================================
# TABLE FILES
# ============================================

def test_table_round_trip(tmp_path, v1_table):
    table, sample = v1_table
    path = save_critical_table(table, tmp_path / 'v1.json', sample)
    assert load_critical_table(path) == table
    loaded, loaded_sample = load_table_with_sample(path)
    assert loaded == table
    np.testing.assert_array_equal(loaded_sample.draws, sample.draws)


def test_table_without_draws(tmp_path, v1_table):
    table, _ = v1_table
    path = save_critical_table(table, tmp_path / 'bare.json')
    assert load_table_with_sample(path) == (table, None)


def _table_json(**overrides):
    data = {
        'version': '1',
        'kind': {'family': 'V', 'functional': 'MAXABS'},
        'delta': 0.2, 'm': 100, 'reps': 1000, 'seed': 0, 'rng': 'numpy.PCG64',
        'quantiles': {'0.1': 2.0, '0.05': 2.5, '0.01': 3.5},
    }
    data.update(overrides)
    return json.dumps(data)


def test_table_with_increasing_levels_is_corrupt(tmp_path):
    path = _write(tmp_path, 't.json', _table_json(quantiles={'0.1': 2.0, '0.05': 1.9}))
    with pytest.raises(CorruptTable):
        load_critical_table(path)


def test_table_version_is_checked(tmp_path):
    with pytest.raises(VersionMismatch):
        load_critical_table(_write(tmp_path, 't.json', _table_json(version='2')))


@pytest.mark.parametrize('text', ['not json', '[1, 2]', _table_json(kind={'family': 'W'}), _table_json(m='x')])
def test_malformed_tables_are_rejected(tmp_path, text):
    with pytest.raises((CorruptTable, VersionMismatch)):
        load_critical_table(_write(tmp_path, 't.json', text))


def test_missing_table(tmp_path):
    with pytest.raises(TableNotFound):
        load_critical_table(tmp_path / 'nope.json')


# ============================================
# DETECTION
# ============================================

def test_detect_report(rng, v1_table):
    table, sample = v1_table
    x = rng.normal(size=200)
    report = detect(x, StatKind.parse('v1'), 0.2, table, sample)
    assert report.value == statistic(x, 0.2, StatKind.parse('v1')).value
    assert 0 < report.p_value <= 1
    for level, cv in report.critical_values.items():
        assert report.decisions[level] == (report.value >= cv)
    data = report.to_dict()
    assert data['statistic'] == 'v1' and len(data['digest']) == 64


def test_detect_infinite_statistic_rejects_everywhere(v1_table):
    table, sample = v1_table
    report = detect([1, 2, 3, 1, 1, 1, 1, 1, 1, 1], StatKind.parse('v1'), 0.2, table, sample)
    assert math.isinf(report.value)
    assert all(report.decisions.values())
    assert report.p_value == pytest.approx(1 / (sample.reps + 1))
    assert report.to_dict()['value'] == 'inf'


def test_detect_checks_table(rng, v1_table):
    table, sample = v1_table
    with pytest.raises(KindMismatch):
        detect(rng.normal(size=50), StatKind.parse('z1'), 0.2, table, sample)
    with pytest.raises(CorruptTable):
        detect(rng.normal(size=50), StatKind.parse('v1'), 0.2, table, None)


# ============================================
# COMMAND LINE
# ============================================

def test_generate_then_detect(tmp_path, capsys, v1_table_file):
    series_file = tmp_path / 'ar.csv'
    assert cli_main(['generate', '--model', 'ar1', '--rho', '0.3', '--n', '300', '--seed', '4',
                     '--out', str(series_file)]) == 0
    capsys.readouterr()

    code = cli_main(['detect', '--input', str(series_file), '--stat', 'v1', '--delta', '0.2',
                     '--critvals', str(v1_table_file), '--json'])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report['statistic'] == 'v1'
    assert report['n'] == 300
    assert set(report['decisions']) == {'0.1', '0.05', '0.01'}
    assert report['table']['seed'] == 11
    assert 0 < report['p_value'] <= 1


def test_generate_with_change_records_change_point(tmp_path):
    out = tmp_path / 'shift.csv'
    assert cli_main(['generate', '--model', 'garch11', '--n', '100', '--change', 'shift',
                     '--theta', '0.25', '--delta-mag', '1.5', '--out', str(out)]) == 0
    assert '# kstar: 25' in out.read_text()
    lrv_line = next(line for line in out.read_text().splitlines() if line.startswith('# long_run_variance:'))
    assert float(lrv_line.split(':')[1]) == pytest.approx(1.25)
    assert load_series(out).n == 100


def test_detect_classical_uses_default_bandwidth(tmp_path, capsys, t1_table_file, rng):
    x = rng.normal(size=125)
    series_file = write_series(Series(x), tmp_path / 'x.csv')
    assert cli_main(['detect', '--input', str(series_file), '--stat', 't1',
                     '--critvals', str(t1_table_file), '--json']) == 0
    report = json.loads(capsys.readouterr().out)
    lrv = bartlett_lrv(x)
    assert lrv.bandwidth == 5
    assert report['value'] == pytest.approx(classical_statistic(x, Functional.MAXABS, lrv), rel=1e-12)


def test_detect_bad_trim_fraction_is_usage_error(tmp_path, capsys, v1_table_file):
    series_file = _write(tmp_path, 'x.csv', "\n".join(str(v) for v in range(20)))
    code = cli_main(['detect', '--input', str(series_file), '--stat', 'v1', '--delta', '0.6',
                     '--critvals', str(v1_table_file)])
    assert code == 1
    assert 'usage:' in capsys.readouterr().err


@pytest.mark.parametrize('argv', [
    [],
    ['frobnicate'],
    ['detect', '--stat', 'v1'],
    ['detect', '--input', 'x', '--stat', 'w9', '--critvals', 't'],
])
def test_bad_arguments_exit_with_one(capsys, argv):
    assert cli_main(argv) == 1
    assert 'usage:' in capsys.readouterr().err


def test_data_errors_exit_with_two(tmp_path, v1_table_file, t1_table_file):
    bad = _write(tmp_path, 'bad.csv', "1\nx\n")
    good = _write(tmp_path, 'good.csv', "\n".join(str(v * v % 7) for v in range(30)))
    base = ['detect', '--stat', 'v1', '--critvals']
    assert cli_main(base + [str(v1_table_file), '--input', str(bad)]) == 2
    assert cli_main(base + [str(v1_table_file), '--input', str(tmp_path / 'missing.csv')]) == 2
    assert cli_main(base + [str(t1_table_file), '--input', str(good)]) == 2


def test_undecodable_series_is_data_error(tmp_path, capsys, v1_table_file):
    path = tmp_path / 'latin.csv'
    path.write_bytes(b"value\n1\n\xff\xfe\n2\n")
    assert cli_main(['detect', '--input', str(path), '--stat', 'v1', '--critvals', str(v1_table_file)]) == 2
    assert 'line 3' in capsys.readouterr().err


@pytest.mark.parametrize('command', [
    ['critvals', '--stat', 'v1', '--grid', '50', '--reps', '10', '--seed', '-1', '--out', 'never.json'],
    ['table', '--id', 'T1', '--reps', '2', '--seed', '-1'],
    ['size', '--n', '60', '--reps', '5', '--seed', '-1'],
])
def test_negative_seed_is_usage_error(capsys, v1_table_file, command):
    if command[0] != 'critvals':
        command = command + ['--critvals', str(v1_table_file)]
    assert cli_main(command) == 1
    assert 'usage:' in capsys.readouterr().err


def test_level_missing_from_table_is_usage_error(capsys, v1_table_file):
    code = cli_main(['size', '--n', '60', '--reps', '5', '--levels', '0.2', '--critvals', str(v1_table_file)])
    assert code == 1
    assert '0.2' in capsys.readouterr().err


def test_help_exits_cleanly(capsys):
    assert cli_main(['--help']) == 0
    assert 'critvals' in capsys.readouterr().out


def test_critvals_writes_table(tmp_path, capsys):
    out = tmp_path / 'z2.json'
    assert cli_main(['critvals', '--stat', 'z2', '--delta', '0.25', '--grid', '80', '--reps', '300',
                     '--seed', '3', '--out', str(out)]) == 0
    table, sample = load_table_with_sample(out)
    assert table.kind == StatKind.parse('z2')
    assert (table.delta, table.m, table.reps, table.seed) == (0.25, 80, 300, 3)
    assert sample.reps == 300
    assert len(capsys.readouterr().out.strip().splitlines()) == 3


def test_critvals_into_repository(tmp_path):
    store = tmp_path / 'store'
    assert cli_main(['--workers', '2', 'critvals', '--stat', 't3', '--grid', '60', '--reps', '200',
                     '--store', str(store)]) == 0
    assert len(list(store.glob('t3_*.json'))) == 1


def test_size_and_power_commands(tmp_path, capsys, v1_table_file):
    assert cli_main(['size', '--model', 'ar1', '--rho', '0.2', '--n', '60', '80', '--reps', '10',
                     '--critvals', str(v1_table_file), '--json']) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 6
    assert {row['n'] for row in rows} == {60, 80}

    out = tmp_path / 'power.csv'
    assert cli_main(['power', '--n', '100', '--reps', '10', '--delta-mag', '3', '--critvals',
                     str(v1_table_file), '--out', str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame['level']) == [0.1, 0.05, 0.01]
    assert (frame['rate'] >= 0.9).all()


def test_power_needs_an_alternative(capsys, v1_table_file):
    assert cli_main(['power', '--n', '100', '--change', 'none', '--critvals', str(v1_table_file)]) == 1


def test_table_command(tmp_path, v1_table_file):
    out = tmp_path / 't8.csv'
    assert cli_main(['table', '--id', 'T8', '--reps', '2', '--critvals', str(v1_table_file),
                     '--out', str(out)]) == 0
    frame = pd.read_csv(out)
    assert len(frame) == 36
    assert set(frame['column']) == {0.0, 0.5, 1.0, 1.5}
