import abc
import csv
import os
from pathlib import Path
from typing import Dict, Iterable, List, NoReturn, Optional, Sequence, Union

import numpy as np

from ..conf import lab_setting
from ..constants import DEFAULT_OUTPUT_DIR_NAME, FLOAT_FORMAT


def format_value(value) -> str:
    """
    Text form used in every CSV and report: floats with 17 significant digits, None as an empty cell.

    -----
    Usage Examples:
        format_value(0.1)     --->    "0.10000000000000001"
        format_value(None)    --->    ""
        format_value(True)    --->    "true"
    """
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, complex, np.floating, np.complexfloating)):
        return format(value, FLOAT_FORMAT)
    return str(value)


def parse_optional_float(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def parse_bool_cell(text: str) -> bool:
    return text == "true"


class BaseDir(abc.ABC):
    """
    Base class for directories.
    Each subclass should implement path() property, as operations happen in that path.
    """

    def create(self) -> NoReturn:
        Path(self.path).mkdir(parents=True, exist_ok=True)

    def get_files(self) -> List[str]:
        try:
            return sorted(os.listdir(self.path))
        except FileNotFoundError:
            return []

    @property
    def has_output(self) -> bool:
        return bool(self.get_files())

    @property
    @abc.abstractmethod
    def path(self) -> Path:
        raise NotImplementedError


class OutputDir(BaseDir):
    """
    Directory the CSVs and the report of one run are written to.
    Without an explicit base, the `OUTPUT_DIR` setting is used, then `./severity_lab_output`.
    Extra directory names are joined below the base.

    -----
    Usage Examples:
        OutputDir().path                      --->    ./severity_lab_output
        OutputDir("/tmp/runs", "fig7").path   --->    /tmp/runs/fig7
    """

    def __init__(self, base: Union[Path, str, None] = None, *dir_names: str):
        self._base_path = Path(base) if base else self.default_base()
        self._dir_names = dir_names

    @staticmethod
    def default_base() -> Path:
        configured = lab_setting("OUTPUT_DIR")
        return Path(configured) if configured else Path.cwd() / DEFAULT_OUTPUT_DIR_NAME

    @property
    def path(self) -> Path:
        return self._base_path / Path(*self._dir_names)


class CsvFile:
    """
    One CSV file with a fixed header.
    Writing always replaces the file, so identical rows give byte-identical files.
    """

    def __init__(self, directory: BaseDir, file_name: str, header: Sequence[str]):
        self.directory = directory
        self._file_name = file_name
        self.header = tuple(header)

    @property
    def path(self) -> Path:
        return self.directory.path / self._file_name

    def write(self, rows: Iterable[Sequence]) -> Path:
        self.directory.create()
        with open(self.path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(self.header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
        return self.path

    def read(self) -> List[Dict[str, str]]:
        with open(self.path, "r", newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if tuple(reader.fieldnames or ()) != self.header:
                raise ValueError(f"{self.path} has header {reader.fieldnames}, expected {list(self.header)}.")
            return list(reader)


class ReportFile:
    """Flat `key=value` text, one entry per line, in insertion order."""

    def __init__(self, directory: BaseDir, file_name: str):
        self.directory = directory
        self._file_name = file_name

    @property
    def path(self) -> Path:
        return self.directory.path / self._file_name

    def write(self, data: Dict[str, object]) -> Path:
        self.directory.create()
        with open(self.path, "w", encoding="utf-8") as f:
            for key, value in data.items():
                f.write(f"{key}={format_value(value)}\n")
        return self.path

    def read(self) -> Dict[str, str]:
        data = {}
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                key, _, value = line.rstrip("\n").partition("=")
                data[key] = value
        return data
