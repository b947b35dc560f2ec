"""Plain-text dataset interchange: comma-separated with header Y,A,X1..Xp.

Floats are written with repr, so a write/read round trip reproduces the
in-memory arrays bit for bit.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .logistic import Dataset


class DataFormatError(ValueError):
    """Raised when a dataset file violates the Y,A,X1..Xp contract."""


def write_dataset(d: Dataset, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("Y,A," + ",".join(f"X{j + 1}" for j in range(d.p)) + "\n")
        for i in range(d.n):
            row = [repr(float(d.Y[i])), repr(float(d.A[i]))]
            row += [repr(float(v)) for v in d.X[i]]
            fh.write(",".join(row) + "\n")
    return path


def read_dataset(path) -> Dataset:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        expected_x = [f"X{j + 1}" for j in range(len(header) - 2)]
        if len(header) < 3 or header[:2] != ["Y", "A"] or header[2:] != expected_x:
            raise DataFormatError(
                f"{path}: header must be Y,A,X1..Xp with p >= 1, got {header}")
        p = len(header) - 2
        ys, as_, xs = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != p + 2:
                raise DataFormatError(
                    f"{path}:{lineno}: expected {p + 2} fields, got {len(row)}")
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: non-numeric cell ({exc})") from None
            if vals[1] not in (0.0, 1.0):
                raise DataFormatError(
                    f"{path}:{lineno}: treatment column A must be 0 or 1, got {row[1]}")
            ys.append(vals[0])
            as_.append(vals[1])
            xs.append(vals[2:])
        if not ys:
            raise DataFormatError(f"{path}: no data rows")
    return Dataset(X=np.array(xs), A=np.array(as_), Y=np.array(ys))
