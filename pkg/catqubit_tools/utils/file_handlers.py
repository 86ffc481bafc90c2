"""
File handling utilities for catqubit-tools.

This module provides result file output (CSV/JSON), atomic writes,
checksums and the run manifest used by the command-line interface.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from .constants import CSV_FLOAT_FORMAT, MANIFEST_NAME
from .validation import ValidationError


class OutputWriter:
    """Writes run outputs into one directory and keeps an inventory of them."""

    def __init__(self, output_dir: Union[str, Path]):
        """
        Initialize output writer.

        Args:
            output_dir: Directory receiving the run outputs
        """
        self.output_dir = Path(output_dir)
        self._written: List[Path] = []
        self._temp_files: List[Path] = []

    def __enter__(self):
        """Context manager entry."""
        self.ensure_directory(self.output_dir)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Context manager exit - remove leftover temporary files."""
        self.cleanup()

    @property
    def written_files(self) -> List[Path]:
        """Files written so far, in write order."""
        return list(self._written)

    def cleanup(self):
        """Remove temporary files left by an interrupted atomic write."""
        for temp_path in self._temp_files:
            try:
                if temp_path.exists():
                    temp_path.unlink()
            except (OSError, PermissionError):
                pass
        self._temp_files.clear()

    def ensure_directory(self, dir_path: Union[str, Path]) -> Path:
        """
        Ensure directory exists.

        Args:
            dir_path: Path to directory

        Returns:
            Directory path
        """
        path = Path(dir_path)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def path_for(self, name: str) -> Path:
        """Return the full path of an output file name."""
        return self.output_dir / name

    def write_text(self, name: str, text: str) -> Path:
        """
        Atomically write a text file into the output directory.

        Args:
            name: File name relative to the output directory
            text: File content

        Returns:
            Path of the written file
        """
        path = self.path_for(name)
        self.ensure_directory(path.parent)
        handle = tempfile.NamedTemporaryFile(
            'w', encoding='utf-8', dir=path.parent, prefix='.tmp_', suffix=path.suffix,
            delete=False,
        )
        temp_path = Path(handle.name)
        self._temp_files.append(temp_path)
        try:
            with handle:
                handle.write(text)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(temp_path, path)
        finally:
            if temp_path in self._temp_files:
                self._temp_files.remove(temp_path)
            if temp_path.exists():
                temp_path.unlink()
        if path not in self._written:
            self._written.append(path)
        return path

    def write_csv(self, name: str, columns: Mapping[str, Sequence[float]]) -> Path:
        """
        Write named numeric columns as CSV with a header line.

        Args:
            name: File name relative to the output directory
            columns: Ordered mapping of column name to values

        Returns:
            Path of the written file
        """
        return self.write_text(name, format_csv(columns))

    def write_json(self, name: str, data: Any) -> Path:
        """
        Write a JSON document with sorted keys.

        Args:
            name: File name relative to the output directory
            data: JSON-serializable object

        Returns:
            Path of the written file
        """
        return self.write_text(name, dumps_json(data))

    def write_manifest(self, manifest: Dict[str, Any]) -> Path:
        """
        Add the output inventory to a manifest and write it last.

        Args:
            manifest: Run metadata (hash, command, tasks, timing)

        Returns:
            Path of the manifest
        """
        manifest = dict(manifest)
        manifest['outputs'] = [
            {
                'path': str(path.relative_to(self.output_dir)),
                'sha256': file_sha256(path),
                'bytes': path.stat().st_size,
            }
            for path in self._written
        ]
        return self.write_json(MANIFEST_NAME, manifest)


def format_csv(columns: Mapping[str, Sequence[float]]) -> str:
    """
    Format equal-length numeric columns as CSV text.

    Args:
        columns: Ordered mapping of column name to values

    Returns:
        CSV text with header

    Raises:
        ValidationError: If columns are empty or of unequal length
    """
    if not columns:
        raise ValidationError("No columns to write", 'columns')
    names = list(columns)
    arrays = [np.asarray(columns[name], dtype=float).ravel() for name in names]
    lengths = {array.size for array in arrays}
    if len(lengths) != 1:
        raise ValidationError(f"Columns have unequal lengths: {sorted(lengths)}", 'columns')
    table = np.column_stack(arrays)
    lines = [','.join(names)]
    for row in table:
        lines.append(','.join(_format_float(value) for value in row))
    return '\n'.join(lines) + '\n'


def _format_float(value: float) -> str:
    if np.isnan(value):
        return 'nan'
    if np.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return CSV_FLOAT_FORMAT % value


def read_csv(file_path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """
    Read a headed numeric CSV file into columns.

    Args:
        file_path: Path to CSV file

    Returns:
        Mapping of column name to float array

    Raises:
        ValidationError: If the file is missing or malformed
    """
    path = Path(file_path)
    if not path.exists():
        raise ValidationError(f"File not found: {path}", 'input')
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            header = handle.readline().strip()
        names = [name.strip() for name in header.split(',')]
        data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ValidationError(f"Cannot read CSV {path}: {e}", 'input') from e
    if data.shape[1] != len(names):
        raise ValidationError(
            f"CSV {path} has {data.shape[1]} columns but {len(names)} header names", 'input'
        )
    return {name: data[:, index] for index, name in enumerate(names)}


def dumps_json(data: Any) -> str:
    """Serialize to canonical, indented JSON text."""
    return json.dumps(_jsonable(data), indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if np.isnan(value) or np.isinf(value):
            return str(value)
        return value
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': float(value.real), 'im': float(value.imag)}
    if isinstance(value, Path):
        return str(value)
    return value


def canonical_hash(data: Any) -> str:
    """SHA-256 of the canonical compact JSON form of data."""
    text = json.dumps(_jsonable(data), sort_keys=True, separators=(',', ':'), ensure_ascii=False)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def file_sha256(file_path: Union[str, Path]) -> str:
    """
    Compute the SHA-256 checksum of a file.

    Args:
        file_path: Path to file

    Returns:
        Hex digest
    """
    digest = hashlib.sha256()
    with open(file_path, 'rb') as handle:
        for block in iter(lambda: handle.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def load_json(file_path: Union[str, Path]) -> Optional[Any]:
    """Load a JSON file, returning None if it does not exist."""
    path = Path(file_path)
    if not path.exists():
        return None
    with open(path, 'r', encoding='utf-8') as handle:
        return json.load(handle)


# Export all file handling functions
__all__ = [
    'OutputWriter',
    'format_csv',
    'read_csv',
    'dumps_json',
    'canonical_hash',
    'file_sha256',
    'load_json',
]
