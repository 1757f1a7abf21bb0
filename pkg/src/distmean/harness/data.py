"""Numeric CSV ingestion and the paired-difference workflow."""

from __future__ import annotations

import csv
import logging
import math

import numpy as np

from ..errors import InvalidArgumentError, ParseError

log = logging.getLogger(__name__)


def load_csv(path, header: bool = False) -> np.ndarray:
    """Read a rectangular numeric CSV into an ``n x p`` matrix.

    With ``header=True`` the first line is skipped. Blank lines are ignored.
    """
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not record or all(not cell.strip() for cell in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(f"{path}: line {lineno} has {len(record)} fields, expected {width}")
            try:
                values = [float(cell) for cell in record]
            except ValueError:
                raise ParseError(f"{path}: line {lineno} contains a non-numeric cell") from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError(f"{path}: line {lineno} contains a non-finite value")
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    log.info("loaded %s: %d rows x %d columns", path, *data.shape)
    return data


def paired_diff(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"paired samples differ in shape: {a.shape} vs {b.shape}")
    return a - b


def shift_rows(z, shift, delta: float) -> np.ndarray:
    """Subtract ``delta * shift`` from every row."""
    z = np.asarray(z, dtype=float)
    shift = np.asarray(shift, dtype=float)
    if z.ndim != 2 or shift.shape != (z.shape[1],):
        raise InvalidArgumentError(f"shift of shape {shift.shape} does not match rows of {z.shape}")
    return z - delta * shift
