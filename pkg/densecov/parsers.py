# -*- coding: utf-8 -*-

import json
import logging
import os
from typing import Tuple, Dict, Any, List

import numpy as np
import pandas as pd

from .const import CLOUD_COLS, FLOAT_FORMAT
from .exceptions import GridParseError, NoDataError

GridBounds = Tuple[float, float, float, float]


def _parse_float(token: str, line_no: int, column: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise GridParseError(f'could not parse "{token}" as a number', line_no, column)
    if not np.isfinite(value):
        raise GridParseError(f'non-finite value "{token}"', line_no, column)
    return value


def parse_grid_file(filepath: str) -> Tuple[np.ndarray, GridBounds]:
    """Parse a density grid file.

    The first line holds ``rows cols xmin xmax ymin ymax``; the cell values follow in row-major order,
    whitespace-separated and free to wrap across lines.

    Args:
        filepath: grid file path

    Returns:
        (rows x cols array of cell values, (xmin, xmax, ymin, ymax))

    Raises:
        GridParseError: with the 1-based line and token column of the first problem
    """
    with open(filepath) as fh:
        lines = fh.readlines()
    header_idx = next((i for i, line in enumerate(lines) if line.strip()), None)
    if header_idx is None:
        raise GridParseError('empty grid file', 1)
    header = lines[header_idx].split()
    header_line_no = header_idx + 1
    if len(header) != 6:
        raise GridParseError(f'expected header "rows cols xmin xmax ymin ymax", got {len(header)} fields',
                             header_line_no)
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise GridParseError(f'grid dimensions must be integers, got "{header[0]} {header[1]}"', header_line_no, 1)
    if rows < 1 or cols < 1:
        raise GridParseError(f'grid dimensions must be positive, got {rows}x{cols}', header_line_no, 1)
    xmin, xmax, ymin, ymax = [_parse_float(tok, header_line_no, i + 3) for i, tok in enumerate(header[2:])]
    if not (xmin < xmax and ymin < ymax):
        raise GridParseError(f'degenerate bounds [{xmin}, {xmax}] x [{ymin}, {ymax}]', header_line_no, 3)

    values: List[float] = []
    expected = rows * cols
    for line_idx in range(header_idx + 1, len(lines)):
        line_no = line_idx + 1
        for col_idx, token in enumerate(lines[line_idx].split()):
            value = _parse_float(token, line_no, col_idx + 1)
            if value < 0.0:
                raise GridParseError(f'negative cell value {value}', line_no, col_idx + 1)
            values.append(value)
            if len(values) > expected:
                raise GridParseError(f'more than {expected} cell values for a {rows}x{cols} grid',
                                     line_no, col_idx + 1)
    if len(values) < expected:
        raise GridParseError(f'expected {expected} cell values for a {rows}x{cols} grid, found {len(values)}',
                             len(lines))
    arr = np.array(values, dtype=float).reshape(rows, cols)
    if not np.any(arr > 0.0):
        raise GridParseError('grid has no positive cell', header_line_no)
    logging.debug('Parsed %sx%s grid from "%s"', rows, cols, filepath)
    return arr, (xmin, xmax, ymin, ymax)


def write_grid_file(filepath: str, values: np.ndarray, bounds: GridBounds) -> None:
    rows, cols = values.shape
    with open(filepath, 'w') as fh:
        fh.write(f'{rows} {cols} ' + ' '.join(FLOAT_FORMAT % b for b in bounds) + '\n')
        for row in values:
            fh.write(' '.join(FLOAT_FORMAT % v for v in row) + '\n')


def read_xyw_table(filepath: str) -> pd.DataFrame:
    """Read a weighted point table with header "x,y,weight"."""
    df = pd.read_csv(filepath, float_precision='round_trip')
    missing = [c for c in CLOUD_COLS if c not in df.columns]
    if missing:
        raise ValueError(f'"{filepath}" is missing required columns {missing} (expected header "x,y,weight")')
    if df.shape[0] == 0:
        raise NoDataError(f'"{filepath}" has no rows')
    return df[CLOUD_COLS]


def write_xyw_table(filepath: str, positions: np.ndarray, weights: np.ndarray) -> None:
    df = pd.DataFrame({'x': positions[:, 0], 'y': positions[:, 1], 'weight': weights})
    df.to_csv(filepath, index=None, float_format=FLOAT_FORMAT)


def read_json(filepath: str) -> Dict[str, Any]:
    with open(filepath) as fh:
        return json.load(fh)


def write_json(filepath: str, obj: Dict[str, Any]) -> None:
    with open(filepath, 'w') as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write('\n')


def read_csv_table(filepath: str) -> pd.DataFrame:
    if not os.path.exists(filepath):
        raise FileNotFoundError(f'Expected file "{filepath}" does not exist')
    return pd.read_csv(filepath, float_precision='round_trip')
