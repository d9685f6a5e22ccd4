"""Rendering of result tables as rich tables, CSV or JSON records."""

import csv
from dataclasses import dataclass
from enum import Enum, unique
import json
import sys
from typing import Final, TextIO, final

from rich.console import Console
from rich.table import Table

from gdrates.tables import Cell, DataTable


@final
@unique
class OutputFormat(Enum):
    TABLE = 'table'
    CSV = 'csv'
    JSON = 'json'


@final
@dataclass(frozen=True, kw_only=True, slots=True)
class Output:
    format: Final[OutputFormat] = OutputFormat.TABLE
    digits: Final[int | None] = None


def format_cell(value: Cell, digits: int) -> str:
    match value:
        case bool() | int() | str():
            return str(value)
        case float():
            return f'{value:.{digits}f}'


def _json_cell(value: Cell, digits: int | None) -> Cell:
    if isinstance(value, float) and digits is not None:
        return round(value, digits)
    return value


def render(
    table: DataTable,
    output: Output,
    file: TextIO | None = None,
    default_digits: int = 6,
) -> None:
    stream = sys.stdout if file is None else file
    digits = default_digits if output.digits is None else output.digits

    match output.format:
        case OutputFormat.TABLE:
            view = Table(*table.columns, title=table.title)
            for row in table.rows:
                view.add_row(*(format_cell(cell, digits) for cell in row))
            Console(file=stream).print(view)

        case OutputFormat.CSV:
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(table.columns)
            for row in table.rows:
                writer.writerow(format_cell(cell, digits) for cell in row)

        case OutputFormat.JSON:
            records = [
                {
                    name: _json_cell(cell, output.digits)
                    for name, cell in zip(table.columns, row, strict=True)
                }
                for row in table.rows
            ]
            json.dump(records, stream, indent=2)
            stream.write('\n')
