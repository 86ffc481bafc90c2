"""Tests for result file output."""

import json
import math

import numpy as np
import pytest

from catqubit_tools.utils.constants import MANIFEST_NAME
from catqubit_tools.utils.file_handlers import (
    OutputWriter,
    canonical_hash,
    dumps_json,
    file_sha256,
    format_csv,
    load_json,
    read_csv,
)
from catqubit_tools.utils.validation import ValidationError


class TestCsv:
    def test_format_and_read(self, tmp_path):
        path = tmp_path / 'trace.csv'
        path.write_text(format_csv({'time': [0.0, 0.5], 'Z': [1.0, 0.25]}), encoding='utf-8')
        table = read_csv(path)
        assert list(table) == ['time', 'Z']
        np.testing.assert_allclose(table['Z'], [1.0, 0.25])

    def test_header_and_format(self):
        text = format_csv({'x': [1.0]})
        assert text.splitlines() == ['x', '1.000000000000e+00']

    def test_non_finite_values(self):
        text = format_csv({'x': [math.nan, math.inf]})
        assert text.splitlines()[1:] == ['nan', 'inf']

    def test_unequal_columns(self):
        with pytest.raises(ValidationError):
            format_csv({'a': [1.0, 2.0], 'b': [1.0]})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError):
            read_csv(tmp_path / 'absent.csv')

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text('a,b\n1,2,3\n', encoding='utf-8')
        with pytest.raises(ValidationError):
            read_csv(path)


class TestJson:
    def test_numpy_and_special_values(self):
        data = json.loads(dumps_json({'a': np.arange(2), 'b': math.inf, 'c': 1 + 2j}))
        assert data == {'a': [0, 1], 'b': 'inf', 'c': {'re': 1.0, 'im': 2.0}}

    def test_hash_ignores_key_order(self):
        assert canonical_hash({'a': 1, 'b': 2}) == canonical_hash({'b': 2, 'a': 1})
        assert canonical_hash({'a': 1}) != canonical_hash({'a': 2})

    def test_load_missing(self, tmp_path):
        assert load_json(tmp_path / 'none.json') is None


class TestOutputWriter:
    def test_inventory_and_manifest(self, tmp_path):
        with OutputWriter(tmp_path / 'out') as writer:
            csv_path = writer.write_csv('trace.csv', {'t': [0.0, 1.0]})
            writer.write_json('result.json', {'value': 1.5})
            manifest_path = writer.write_manifest({'command': 'simulate'})

        manifest = json.loads(manifest_path.read_text(encoding='utf-8'))
        assert manifest_path.name == MANIFEST_NAME
        paths = [entry['path'] for entry in manifest['outputs']]
        assert paths == ['trace.csv', 'result.json']
        assert manifest['outputs'][0]['sha256'] == file_sha256(csv_path)

    def test_no_temporary_files_left(self, tmp_path):
        with OutputWriter(tmp_path) as writer:
            writer.write_text('notes.txt', 'ok')
        assert sorted(p.name for p in tmp_path.iterdir()) == ['notes.txt']

    def test_nested_directory(self, tmp_path):
        with OutputWriter(tmp_path) as writer:
            path = writer.write_text('sub/a.txt', 'x')
        assert path.exists()

    def test_rewrite_is_listed_once(self, tmp_path):
        with OutputWriter(tmp_path) as writer:
            writer.write_text('a.txt', '1')
            writer.write_text('a.txt', '2')
            assert len(writer.written_files) == 1
