"""CSV output of profiles and distribution slices, and reference comparison."""

import csv
import os
from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import ConfigurationError

__all__ = ["ProfileRecord", "PROFILE_COLUMNS", "records_from_arrays", "write_profile_csv",
           "read_profile_csv", "write_slice_csv", "read_csv", "compare_reference",
           "write_table_csv"]


@dataclass(frozen=True)
class ProfileRecord:
    x: float
    rho: float
    U: float
    T: float
    p: float
    q_x: float
    shear: float
    dt_tau: float

    def __post_init__(self):
        if not all(np.isfinite(v) for v in astuple(self)):
            raise ValueError("profile record has non-finite values")


PROFILE_COLUMNS = tuple(f.name for f in fields(ProfileRecord))


def records_from_arrays(**cols):
    missing = [c for c in PROFILE_COLUMNS if c not in cols]
    if missing:
        raise ValueError(f"missing profile columns {missing}")
    arrays = [np.broadcast_to(np.asarray(cols[c], dtype=float), np.shape(cols["x"]))
              for c in PROFILE_COLUMNS]
    return [ProfileRecord(*map(float, row)) for row in zip(*arrays)]


def _fmt(v):
    return format(float(v), ".17g")


def write_table_csv(path, header, rows):
    """Write one header line and full-precision rows."""
    try:
        d = os.path.dirname(os.path.abspath(path))
        os.makedirs(d, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def write_profile_csv(records, path):
    write_table_csv(path, PROFILE_COLUMNS, (astuple(r) for r in records))


def write_slice_csv(u, f_slice, path, label="f"):
    """Distribution slice f(u, 0, 0); ``f_slice`` may be (n,) or (k, n)."""
    vals = np.atleast_2d(np.asarray(f_slice, dtype=float))
    labels = [label] if vals.shape[0] == 1 else [f"{label}{i}" for i in range(vals.shape[0])]
    if isinstance(label, (list, tuple)):
        labels = list(label)
    write_table_csv(path, ["u"] + labels, np.column_stack([u, vals.T]))


def read_csv(path):
    """Return (header, 2D float array)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return header, data


def read_profile_csv(path):
    header, data = read_csv(path)
    if tuple(header) != PROFILE_COLUMNS:
        raise ValueError(f"{path}: unexpected profile header {header}")
    return [ProfileRecord(*row) for row in data]


def _columns(records, column):
    if isinstance(records, np.ndarray):
        return records[:, 0], records[:, 1]
    x = np.array([r.x for r in records])
    y = np.array([getattr(r, column) for r in records])
    return x, y


def compare_reference(computed, reference, norm="L1", column="rho"):
    """Normalised L1 (mean abs) or Linf difference of one profile column.

    The reference is sorted and linearly interpolated onto the computed x
    positions that fall inside its range.  Accepts record lists or (n, 2)
    arrays of (x, value).
    """
    xc, yc = _columns(computed, column)
    xr, yr = _columns(reference, column)
    order = np.argsort(xr)
    xr, yr = xr[order], yr[order]
    inside = (xc >= xr[0]) & (xc <= xr[-1])
    if not np.any(inside):
        raise ConfigurationError("computed and reference x-ranges do not overlap")
    diff = yc[inside] - np.interp(xc[inside], xr, yr)
    scale = np.max(np.abs(yr))
    if norm == "L1":
        err = np.mean(np.abs(diff))
    elif norm == "Linf":
        err = np.max(np.abs(diff))
    else:
        raise ConfigurationError(f"unknown norm {norm!r}")
    return float(err / scale) if scale > 0 else float(err)
