"""Tests for the critical-value table repository"""

import pytest

from ratiocusum import repository
from ratiocusum.exceptions import CorruptTable, TableNotFound
from ratiocusum.models import StatKind
from ratiocusum.repository import CriticalTableRepository, get_table_repository, save_critical_table

V1 = StatKind.parse('v1')


def test_save_and_get(tmp_path, v1_table):
    table, sample = v1_table
    repo = CriticalTableRepository(tmp_path)
    path = repo.save(table, sample)
    assert path.name == 'v1_delta0.2_m200_reps600_seed11.json'
    assert repo.exists(V1, 0.2, 200, 600, 11)
    loaded, loaded_sample = repo.get(V1, 0.2, 200, 600, 11)
    assert loaded == table
    assert loaded_sample.reps == 600


def test_get_missing_table(tmp_path):
    with pytest.raises(TableNotFound):
        CriticalTableRepository(tmp_path).get(V1, 0.2, 200, 600, 11)


def test_default_root_comes_from_environment(tmp_path):
    assert get_table_repository().root == tmp_path / 'tables'


def test_list_tables_skips_unreadable_files(tmp_path, v1_table):
    table, _ = v1_table
    repo = CriticalTableRepository(tmp_path)
    repo.save(table)
    (tmp_path / 'junk.json').write_text('{"version": "1"}')
    assert repo.list_tables() == [table]
    assert CriticalTableRepository(tmp_path / 'absent').list_tables() == []


def test_get_or_build_builds_once(tmp_path, monkeypatch):
    repo = CriticalTableRepository(tmp_path)
    table, sample = repo.get_or_build(V1, 0.2, m=60, reps=150, seed=2, workers=1)
    assert repo.exists(V1, 0.2, 60, 150, 2)

    def fail(*args, **kwargs):
        raise AssertionError('table should have been loaded')

    monkeypatch.setattr(repository, 'build_table', fail)
    again, again_sample = repo.get_or_build(V1, 0.2, m=60, reps=150, seed=2, workers=1)
    assert again == table
    assert list(again_sample.draws) == list(sample.draws)


def test_sample_must_match_table(tmp_path, v1_table, t1_table):
    table, _ = v1_table
    _, other_sample = t1_table
    with pytest.raises(CorruptTable):
        save_critical_table(table, tmp_path / 'x.json', other_sample)
